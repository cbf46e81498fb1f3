#pragma once
// Seeded synthetic volumes with path-connected foreground objects. The
// distractor variant paints a homogeneous near-foreground corridor hugging
// the object so that gradient-only shortest paths leave the object while
// probability-guided ones stay inside.

#include <cstdint>
#include <utility>

#include "exseg/volume.hpp"

namespace exseg {

enum class PhantomKind { Blob, BentTube, BlobWithDistractor };

struct PhantomSpec {
  std::array<int, 3> shape{48, 48, 24};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  PhantomKind kind = PhantomKind::Blob;
  float fg_intensity = 0.75f;
  float bg_intensity = 0.25f;
  float noise_sd = 0.0f;
  float distractor_contrast = 0.8f;  ///< corridor level as a fraction of fg-bg contrast
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  Volume image;
  Volume gt;  ///< binary {0,1}
};

/// Builds the image and ground truth for a spec. The foreground is checked to
/// be a single 26-connected component covering 1-20% of the volume;
/// generation retries up to 10 perturbed attempts before failing.
Phantom generate_phantom(const PhantomSpec& spec);

/// True when the foreground of `gt` is exactly one 26-connected component.
bool single_connected_component(const Volume& gt);

}  // namespace exseg
