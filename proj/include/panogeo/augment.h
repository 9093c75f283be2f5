#pragma once

#include <cstdint>
#include <vector>

#include "panogeo/resample.h"
#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

struct FrameTriplet {
  EquirectImage image;
  DepthMap depth;
  Pose pose;  // camera-to-world
};

// Rotates camera-frame content by r_aug (X_c' = r_aug X_c) and compensates
// the pose (rot' = rot r_aug^T) so world geometry is unchanged. RGB is
// resampled bilinearly and depth with nearest neighbor.
FrameTriplet augment_triplet(const FrameTriplet& t, const Rotation& r_aug);

enum class AugmentMode { kIndependentPerFrame, kShared };

struct AugmentedSet {
  std::vector<FrameTriplet> frames;
  std::vector<Rotation> rotations;  // one per frame, as applied
};

// Draws rotations from a generator seeded with `seed`: one per frame in
// frame order, or a single shared one.
AugmentedSet augment_set(const std::vector<FrameTriplet>& frames,
                         std::uint64_t seed,
                         AugmentMode mode = AugmentMode::kIndependentPerFrame);

}  // namespace panogeo
