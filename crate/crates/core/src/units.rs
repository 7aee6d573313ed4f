//! Unit tags and the conversions between metric and US customary units.

/// Feet per metre.
pub const FT_PER_M: f64 = 3.28084;
/// Miles per hour per kilometre per hour.
pub const MPH_PER_KMH: f64 = 0.621371;
/// Metres per statute mile.
pub const M_PER_MI: f64 = 1609.344;
/// Metres per second per mile per hour.
pub const MPS_PER_MPH: f64 = 0.44704;

pub fn m_to_ft(m: f64) -> f64 {
    m * FT_PER_M
}

pub fn ft_to_m(ft: f64) -> f64 {
    ft / FT_PER_M
}

pub fn kmh_to_mph(kmh: f64) -> f64 {
    kmh * MPH_PER_KMH
}

pub fn mi_to_m(mi: f64) -> f64 {
    mi * M_PER_MI
}

pub fn mph_to_mps(mph: f64) -> f64 {
    mph * MPS_PER_MPH
}

/// Conversion for a key suffix such as `_m` or `_kmh`.
///
/// Returns the canonical unit tag the suffix converts into and the
/// multiplicative factor. `None` for suffixes that are not unit names.
pub fn suffix_conversion(suffix: &str) -> Option<(&'static str, f64)> {
    let conv = match suffix {
        "ft" => ("ft", 1.0),
        "m" => ("ft", FT_PER_M),
        "mph" => ("mph", 1.0),
        "kmh" | "kph" => ("mph", MPH_PER_KMH),
        "mps" => ("mph", 1.0 / MPS_PER_MPH),
        "mi" => ("mi", 1.0),
        "km" => ("mi", 1000.0 / M_PER_MI),
        "pct" => ("%", 1.0),
        "vph" => ("veh/h", 1.0),
        _ => return None,
    };
    Some(conv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_metre_lane_in_feet() {
        assert!((m_to_ft(4.0) - 13.12336).abs() < 1e-9);
        assert!((ft_to_m(m_to_ft(3.5)) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn sixty_mph_in_metres_per_second() {
        assert!((mph_to_mps(60.0) - 26.8224).abs() < 1e-9);
    }

    #[test]
    fn suffixes() {
        assert_eq!(suffix_conversion("m"), Some(("ft", FT_PER_M)));
        assert_eq!(suffix_conversion("kmh").unwrap().0, "mph");
        assert_eq!(suffix_conversion("width"), None);
    }
}
