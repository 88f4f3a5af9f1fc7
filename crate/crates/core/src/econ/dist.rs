use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() || !(df > 0.0) {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Like [`t_two_sided_p`], falling back to the standard normal when no
/// degrees of freedom are available.
pub fn t_two_sided_p_or_normal(t: f64, df: f64) -> f64 {
    if df > 0.0 {
        t_two_sided_p(t, df)
    } else if t.is_nan() {
        f64::NAN
    } else {
        let n = Normal::new(0.0, 1.0).expect("standard normal");
        (2.0 * n.cdf(-t.abs())).clamp(0.0, 1.0)
    }
}
