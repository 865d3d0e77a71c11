#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smokebench/core.hpp"
#include "smokebench/ingest.hpp"

namespace smokebench {

inline constexpr double kEarthRadiusKm = 6371.0;

// Great-circle distance on the R=6371.0 km sphere.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

struct MonitorSelection {
  std::string city_id;
  std::vector<std::string> monitor_ids;  // sorted by (distance, monitor_id)
  std::vector<double> distances_km;      // parallel to monitor_ids
  double radius_used_km = 0.0;
  bool empty() const { return monitor_ids.empty(); }
};

// Up to max_neighbors stations within primary_radius_km of the city center,
// nearest first; if none qualify the fallback radius is tried. Stations whose
// active_range misses date_range are dropped first. Boundary distances are
// inclusive; ties at the cutoff resolve by monitor_id lexicographic order.
// Computed once per city per run.
MonitorSelection select_monitors(const UrbanArea& city, std::span<const MonitorStation> stations,
                                 const std::optional<std::pair<Date, Date>>& date_range,
                                 double primary_radius_km, double fallback_radius_km,
                                 int max_neighbors);

struct CellSelection {
  std::string city_id;
  ModelId model;
  std::vector<GeoPoint> locations;  // sorted by (distance, lat, lon)
  double radius_km = 0.0;
  bool empty() const { return locations.empty(); }
};

// Every available sample location within radius_km (inclusive) of the center.
CellSelection select_forecast_cells(const UrbanArea& city, const ModelId& model,
                                    std::span<const GeoPoint> available, double radius_km);

}  // namespace smokebench
