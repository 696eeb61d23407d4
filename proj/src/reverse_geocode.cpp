// Copyright 2026 The Geolink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "geolink/reverse_geocode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "geolink/error.hpp"

namespace geolink {
namespace {

constexpr std::uint32_t kLeafSize = 8;
// Unit-sphere slack on the pruning bound; far above haversine rounding error.
constexpr double kChordSlack = 1e-9;

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

void require_valid(const GeoPoint& p) {
  if (!p.valid() || !std::isfinite(p.latitude) || !std::isfinite(p.longitude)) {
    throw InputError("coordinates out of range: (" +
                     std::to_string(p.latitude) + ", " +
                     std::to_string(p.longitude) + ")");
  }
}

}  // namespace

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double dlat = radians(b.latitude - a.latitude);
  const double dlon = radians(b.longitude - a.longitude);
  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  double h = s_lat * s_lat + std::cos(radians(a.latitude)) *
                                 std::cos(radians(b.latitude)) * s_lon * s_lon;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

Eigen::Vector3d to_unit_sphere(const GeoPoint& p) {
  const double lat = radians(p.latitude);
  const double lon = radians(p.longitude);
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
          std::sin(lat)};
}

struct CityLocator::Best {
  double km = std::numeric_limits<double>::infinity();
  std::int64_t id = 0;
  std::uint32_t index = 0;
  double chord = std::numeric_limits<double>::infinity();

  void offer(double candidate_km, std::int64_t candidate_id,
             std::uint32_t candidate_index) {
    if (candidate_km < km || (candidate_km == km && candidate_id < id)) {
      km = candidate_km;
      id = candidate_id;
      index = candidate_index;
      chord = 2.0 * std::sin(std::min(km / (2.0 * kEarthRadiusKm),
                                      std::numbers::pi / 2.0));
    }
  }
};

CityLocator::CityLocator(std::vector<LocationEntity> cities)
    : cities_(std::move(cities)) {
  if (cities_.empty()) {
    throw InputError("location database has no cities to reverse geocode to");
  }
  points_.reserve(cities_.size());
  for (const auto& c : cities_) {
    if (c.granularity != Granularity::City) {
      throw InputError("city locator given a non-city entity: " + c.name);
    }
    GeoPoint p{c.latitude, c.longitude};
    require_valid(p);
    points_.push_back(to_unit_sphere(p));
  }
  order_.resize(cities_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * cities_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t CityLocator::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(
      std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  // Index tiebreak keeps the build deterministic across std::nth_element
  // implementations.
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void CityLocator::search(std::int32_t node_id, const Eigen::Vector3d& q,
                         const GeoPoint& p, Best& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t c = order_[i];
      const auto& city = cities_[c];
      best.offer(haversine_km(p, {city.latitude, city.longitude}),
                 city.entity_id, c);
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, p, best);
  if (std::abs(diff) <= best.chord + kChordSlack) search(far, q, p, best);
}

const LocationEntity& CityLocator::nearest(const GeoPoint& point) const {
  require_valid(point);
  Best best;
  search(0, to_unit_sphere(point), point, best);
  return cities_[best.index];
}

CityLocator build_city_locator(std::vector<LocationEntity> cities) {
  return CityLocator(std::move(cities));
}

const LocationEntity& nearest_city(const CityLocator& locator,
                                   const GeoPoint& point) {
  return locator.nearest(point);
}

}  // namespace geolink
