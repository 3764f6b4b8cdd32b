#pragma once

#include <filesystem>

#include "dpc/panel.hpp"

namespace dpc {

/// Reads a panel: mandatory header row of series names, then T rows of m
/// comma-separated numeric cells (plain decimal or scientific, no locale).
/// Throws InputError with row/column location on malformed input.
SeriesPanel read_panel_csv(const std::filesystem::path& path);

/// Writes a panel with 17 significant digits so values round-trip exactly.
void write_panel_csv(const std::filesystem::path& path,
                     const SeriesPanel& panel);

}  // namespace dpc
