//! Conversions between the SI values used internally and the dB / per-km²
//! values people usually quote.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub const M2_PER_KM2: f64 = 1.0e6;

pub fn per_km2_to_per_m2(per_km2: f64) -> f64 {
    per_km2 / M2_PER_KM2
}

pub fn per_m2_to_per_km2(per_m2: f64) -> f64 {
    per_m2 * M2_PER_KM2
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_points() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-70.0) - 1e-10).abs() < 1e-25);
        assert!((db_to_linear(20.0) - 100.0).abs() < 1e-12);
        assert!((per_km2_to_per_m2(5.0) - 5e-6).abs() < 1e-20);
    }

    proptest! {
        #[test]
        fn dbm_round_trip(w in 1e-15f64..1e3) {
            let back = dbm_to_watts(watts_to_dbm(w));
            prop_assert!(((back - w) / w).abs() < 1e-12);
        }

        #[test]
        fn db_round_trip(x in 1e-6f64..1e6) {
            let back = db_to_linear(linear_to_db(x));
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }
    }
}
