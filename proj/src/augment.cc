#include "panogeo/augment.h"

#include "panogeo/error.h"

namespace panogeo {

FrameTriplet augment_triplet(const FrameTriplet& t, const Rotation& r_aug) {
  if (t.image.width() != t.depth.width() || t.image.height() != t.depth.height()) {
    throw ContractError("image and depth dimensions differ");
  }
  return FrameTriplet{rotate_equirect(t.image, r_aug, Interp::kBilinear),
                      rotate_equirect(t.depth, r_aug, Interp::kNearest),
                      Pose{t.pose.rot * r_aug.transpose(), t.pose.trans}};
}

AugmentedSet augment_set(const std::vector<FrameTriplet>& frames,
                         std::uint64_t seed, AugmentMode mode) {
  if (frames.empty()) throw ContractError("augment_set needs at least one frame");
  Rng rng(seed);
  AugmentedSet out;
  if (mode == AugmentMode::kShared) {
    out.rotations.assign(frames.size(), sample_uniform_rotation(rng));
  } else {
    for (size_t i = 0; i < frames.size(); ++i) {
      out.rotations.push_back(sample_uniform_rotation(rng));
    }
  }
  out.frames.reserve(frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    out.frames.push_back(augment_triplet(frames[i], out.rotations[i]));
  }
  return out;
}

}  // namespace panogeo
