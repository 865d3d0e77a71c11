#include "smokebench/spatial.hpp"

#include <algorithm>
#include <cmath>

#include "smokebench/ingest.hpp"

namespace smokebench {

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  constexpr double kDegToRad = M_PI / 180.0;
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

namespace {

bool active_during(const MonitorStation& s, const std::optional<std::pair<Date, Date>>& range) {
  if (!s.active_range || !range) return true;
  return !(s.active_range->second < range->first || range->second < s.active_range->first);
}

}  // namespace

MonitorSelection select_monitors(const UrbanArea& city, std::span<const MonitorStation> stations,
                                 const std::optional<std::pair<Date, Date>>& date_range,
                                 double primary_radius_km, double fallback_radius_km,
                                 int max_neighbors) {
  struct Candidate {
    double distance;
    const MonitorStation* station;
  };
  std::vector<Candidate> candidates;
  for (const auto& s : stations) {
    if (!active_during(s, date_range)) continue;
    candidates.push_back({haversine_km(city.center, s.location), &s});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.station->monitor_id < b.station->monitor_id;
  });

  MonitorSelection sel;
  sel.city_id = city.id;
  for (const double radius : {primary_radius_km, fallback_radius_km}) {
    sel.monitor_ids.clear();
    sel.distances_km.clear();
    sel.radius_used_km = radius;
    for (const auto& c : candidates) {
      if (c.distance > radius) break;
      if (int(sel.monitor_ids.size()) >= max_neighbors) break;
      sel.monitor_ids.push_back(c.station->monitor_id);
      sel.distances_km.push_back(c.distance);
    }
    if (!sel.empty()) return sel;
  }
  return sel;  // empty: evaluation skips the city with a diagnostic
}

CellSelection select_forecast_cells(const UrbanArea& city, const ModelId& model,
                                    std::span<const GeoPoint> available, double radius_km) {
  struct Candidate {
    double distance;
    GeoPoint point;
  };
  std::vector<Candidate> hits;
  for (const auto& p : available) {
    const double d = haversine_km(city.center, p);
    if (d <= radius_km) hits.push_back({d, p});
  }
  std::sort(hits.begin(), hits.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.point.lat != b.point.lat) return a.point.lat < b.point.lat;
    return a.point.lon < b.point.lon;
  });
  CellSelection sel;
  sel.city_id = city.id;
  sel.model = model;
  sel.radius_km = radius_km;
  for (const auto& h : hits) sel.locations.push_back(h.point);
  return sel;
}

}  // namespace smokebench
