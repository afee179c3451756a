#pragma once

#include <cstdint>
#include <string>

#include "oodgate/evaluation.hpp"

namespace oodgate {

// Desk-scale synthetic corpus. Class 1 images imitate color fundus
// photographs: a bright reddish-orange disc with mild vignette and dark
// vessel-like curves on a black background. Class 0 mixes three looks:
// full-frame gray noise, bright-field color texture, and high-contrast
// rectangular grids. All images are size x size PNGs; the split is
// stratified by class. Same seed, same bytes.
struct CorpusSpec {
  int n_internal_per_class = 0;
  int n_external_per_class = 0;
  std::uint64_t seed = 0;
  int size = 512;
};

// Writes the images plus manifest.csv into out_dir and returns the loaded
// manifest. Errors: IoFailure.
DatasetManifest generate_synthetic_corpus(const std::string& out_dir,
                                          const CorpusSpec& spec);

// CLI form: n_per_class images per class, split 70% internal / 30% external.
DatasetManifest generate_synthetic_corpus(const std::string& out_dir,
                                          int n_per_class, std::uint64_t seed);

// Single-image generators, exposed for tests.
RasterImage synth_fundus_image(std::uint64_t seed, int index, int size = 512);
RasterImage synth_nonfundus_image(std::uint64_t seed, int index, int size = 512);

}  // namespace oodgate
