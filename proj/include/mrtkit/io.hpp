#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrtkit/chaos.hpp"
#include "mrtkit/clark_ocone.hpp"
#include "mrtkit/path_bundle.hpp"

namespace mrtkit {

// Channel CSV: header "path_id,channel,t_0,...,t_M", one row per
// (path, channel), full double precision. max_paths caps the rows written
// (0 means all paths).
void export_channels_csv(const PathBundle& bundle, const std::filesystem::path& file,
                         int max_paths = 0);

// JSON manifest carrying grid, seed, path count and the jump spec if any.
nlohmann::ordered_json bundle_manifest(const PathBundle& bundle);
void export_manifest(const PathBundle& bundle, const std::filesystem::path& file);

// Rebuild a bundle from manifest + channel CSV (channels only; jump records
// are not round-tripped through CSV).
PathBundle import_bundle(const std::filesystem::path& manifest_file,
                         const std::filesystem::path& csv_file);

// integrand CSV: "t,path_id,channel,value" rows for every block
void export_integrand_csv(const IntegrandEstimate& integrand,
                          const std::filesystem::path& file, int max_paths = 0);

// weight vector: "path_id,weight"
void export_weights_csv(const std::vector<double>& weights,
                        const std::filesystem::path& file);

// dense coefficient matrix as plain CSV rows
void export_matrix_csv(const std::vector<std::vector<double>>& rows,
                       const std::filesystem::path& file);

nlohmann::ordered_json chaos_to_json(const ChaosExpansion& expansion);
ChaosExpansion chaos_from_json(const nlohmann::json& j);

}  // namespace mrtkit
