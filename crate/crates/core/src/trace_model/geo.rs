//! Distances on the WGS84 sphere and local-day arithmetic.

use serde::{Deserialize, Serialize};

pub const EARTH_RADIUS_M: f64 = 6_371_008.8;
pub const SECONDS_PER_DAY: i64 = 86_400;

/// Great-circle distance in meters.
pub fn haversine_m(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Euclidean distance in degree space.
pub fn planar_deg(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    ((lon2 - lon1).powi(2) + (lat2 - lat1).powi(2)).sqrt()
}

/// Unit-sphere cartesian coordinates; chord length is monotone in great-circle distance.
pub fn unit_vector(lon: f64, lat: f64) -> [f64; 3] {
    let (lon, lat) = (lon.to_radians(), lat.to_radians());
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    #[default]
    Haversine,
    Planar,
}

impl DistanceMetric {
    pub fn distance(self, lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
        match self {
            DistanceMetric::Haversine => haversine_m(lon1, lat1, lon2, lat2),
            DistanceMetric::Planar => planar_deg(lon1, lat1, lon2, lat2),
        }
    }
}

/// Maps epoch seconds to local calendar days and times of day under a fixed UTC offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalClock {
    pub utc_offset_hours: f64,
}

impl Default for LocalClock {
    fn default() -> Self {
        LocalClock { utc_offset_hours: 8.0 }
    }
}

impl LocalClock {
    pub fn new(utc_offset_hours: f64) -> Self {
        LocalClock { utc_offset_hours }
    }

    fn local(&self, t: i64) -> i64 {
        t + (self.utc_offset_hours * 3600.0).round() as i64
    }

    /// Days since 1970-01-01 in local time.
    pub fn day(&self, t: i64) -> i64 {
        self.local(t).div_euclid(SECONDS_PER_DAY)
    }

    pub fn seconds_of_day(&self, t: i64) -> i64 {
        self.local(t).rem_euclid(SECONDS_PER_DAY)
    }

    /// 0 = Monday .. 6 = Sunday.
    pub fn weekday(&self, t: i64) -> u32 {
        // 1970-01-01 was a Thursday.
        (self.day(t) + 3).rem_euclid(7) as u32
    }

    pub fn is_weekend(&self, t: i64) -> bool {
        self.weekday(t) >= 5
    }
}

/// Meters-to-degrees conversion at a reference latitude.
pub fn meters_to_degrees(meters: f64, ref_lat: f64) -> (f64, f64) {
    let dlat = (meters / EARTH_RADIUS_M).to_degrees();
    let dlon = dlat / ref_lat.to_radians().cos().max(1e-9);
    (dlon, dlat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haversine_one_degree_on_equator() {
        let d = haversine_m(0.0, 0.0, 1.0, 0.0);
        assert!((d - 111_195.0).abs() < 10.0, "{d}");
        assert_eq!(haversine_m(3.0, 4.0, 3.0, 4.0), 0.0);
    }

    #[test]
    fn local_clock_day_boundaries() {
        let clock = LocalClock::new(8.0);
        // 1970-01-01 16:00 UTC is local midnight of Jan 2.
        assert_eq!(clock.day(16 * 3600 - 1), 0);
        assert_eq!(clock.day(16 * 3600), 1);
        assert_eq!(clock.seconds_of_day(16 * 3600), 0);
        // Jan 3 1970 (local) is a Saturday.
        assert_eq!(clock.weekday(16 * 3600 + SECONDS_PER_DAY), 5);
        assert!(clock.is_weekend(16 * 3600 + SECONDS_PER_DAY));
        assert_eq!(LocalClock::new(0.0).weekday(0), 3);
    }

    #[test]
    fn negative_times_use_floor_division() {
        let clock = LocalClock::new(0.0);
        assert_eq!(clock.day(-1), -1);
        assert_eq!(clock.seconds_of_day(-1), SECONDS_PER_DAY - 1);
    }
}
