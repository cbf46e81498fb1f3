#pragma once
// On-disk formats. Volumes are a JSON header sidecar (shape, spacing, dtype,
// voxel order) next to a raw little-endian float32 payload; extreme points,
// checkpoints and configs are UTF-8 JSON with keys in fixed order.

#include <filesystem>
#include <string>
#include <utility>

#include "exseg/annotations.hpp"
#include "exseg/trainer.hpp"
#include "exseg/volume.hpp"

namespace exseg {

/// "v" or "v.json" -> header "v.json"; the payload lives beside it as "v.raw".
std::filesystem::path volume_header_path(const std::filesystem::path& path);
std::filesystem::path volume_payload_path(const std::filesystem::path& path);

Volume read_volume(const std::filesystem::path& path);
void write_volume(const std::filesystem::path& path, const Volume& vol);

/// JSON object with exactly the keys x_min, x_max, y_min, y_max, z_min,
/// z_max, each an [i, j, k] integer triple.
ExtremePointSet read_points(const std::filesystem::path& path);
void write_points(const std::filesystem::path& path, const ExtremePointSet& pts);

void save_checkpoint(const std::filesystem::path& path, const VoxelLogisticModel& model,
                     const TrainConfig& cfg);
std::pair<VoxelLogisticModel, TrainConfig> load_checkpoint(const std::filesystem::path& path);

/// Overlays the fields present in the JSON object text onto `base`. Accepted
/// keys: lr0, momentum, iterations, lr_step, lr_total, lambda, r,
/// geodesic_mode, gamma_focal, seed, supervision_mode, sigma_alpha,
/// sigma_beta, window_radius, include_self, sigma_alpha_units.
TrainConfig train_config_from_json(const std::string& text, TrainConfig base = {});
std::string train_config_to_json(const TrainConfig& cfg);

std::string supervision_mode_name(SupervisionMode m);
SupervisionMode parse_supervision_mode(std::string name);
std::string geodesic_metric_name(GeodesicMetric m);
GeodesicMetric parse_geodesic_metric(std::string name);

}  // namespace exseg
