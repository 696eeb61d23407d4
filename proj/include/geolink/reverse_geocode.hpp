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

#ifndef GEOLINK_REVERSE_GEOCODE_HPP_
#define GEOLINK_REVERSE_GEOCODE_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "geolink/gazetteer.hpp"

namespace geolink {

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  bool valid() const {
    return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 &&
           longitude <= 180.0;
  }
};

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Unit vector on the sphere for a point.
Eigen::Vector3d to_unit_sphere(const GeoPoint& p);

// Immutable k-d tree over city positions embedded on the unit sphere. Chord
// length is monotone in great-circle distance, so the tree prunes in 3-D while
// candidates are ranked by (haversine_km, entity_id).
class CityLocator {
 public:
  // Throws InputError on an empty list or a non-city entity.
  explicit CityLocator(std::vector<LocationEntity> cities);

  // Throws InputError on out-of-range coordinates.
  const LocationEntity& nearest(const GeoPoint& point) const;

  std::size_t size() const { return cities_.size(); }
  const std::vector<LocationEntity>& cities() const { return cities_; }

 private:
  struct Node {
    // Leaves own [begin, end) of order_; inner nodes split on `axis`.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };
  struct Best;

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Eigen::Vector3d& q, const GeoPoint& p,
              Best& best) const;

  std::vector<LocationEntity> cities_;
  std::vector<Eigen::Vector3d> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

CityLocator build_city_locator(std::vector<LocationEntity> cities);
const LocationEntity& nearest_city(const CityLocator& locator,
                                   const GeoPoint& point);

}  // namespace geolink

#endif  // GEOLINK_REVERSE_GEOCODE_HPP_
