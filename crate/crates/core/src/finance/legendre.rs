//! Legendre-series approximation of the Heaviside step on `[-1, 1]`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeavisideMode {
    /// `c_l = P_{l-1}(0) + P_{l+1}(0)`, as commonly printed.
    Verbatim,
    /// Fourier-Legendre projection `c_l = (P_{l-1}(0) - P_{l+1}(0)) / 2`.
    #[default]
    Orthogonal,
}

impl std::str::FromStr for HeavisideMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "verbatim" => Ok(Self::Verbatim),
            "orthogonal" => Ok(Self::Orthogonal),
            _ => Err(format!("unknown Heaviside mode `{s}` (verbatim|orthogonal)")),
        }
    }
}

/// `P_l(x)` by the three-term recurrence.
pub fn legendre_p(l: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if l == 0 {
        return prev;
    }
    for k in 1..l {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_l(0)`: zero for odd `l`, `(-1)^{l/2} (l-1)!! / l!!` for even `l`.
pub fn legendre_at_zero(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let mut v = 1.0;
    for k in (2..=l).step_by(2) {
        v *= -((k - 1) as f64) / k as f64;
    }
    v
}

/// `c_0 … c_r`, with `c_0 = 1/2` in both modes.
pub fn heaviside_coefficients(r: usize, mode: HeavisideMode) -> Vec<f64> {
    let mut c = vec![0.5];
    for l in 1..=r {
        let (a, b) = (legendre_at_zero(l - 1), legendre_at_zero(l + 1));
        c.push(match mode {
            HeavisideMode::Verbatim => a + b,
            HeavisideMode::Orthogonal => (a - b) / 2.0,
        });
    }
    c
}

/// `Σ_l c_l P_l(x)`.
pub fn heaviside_series(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(l, c)| c * legendre_p(l, x))
        .sum()
}

/// Highest `l` with a non-zero coefficient.
pub fn series_degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(2l+1)/2 ∫_{-1}^{1} Θ(x) P_l(x) dx` by composite Simpson on `[0, 1]`.
    fn projection(l: usize) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut s = legendre_p(l, 0.0) + legendre_p(l, 1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * legendre_p(l, i as f64 * h);
        }
        (2 * l + 1) as f64 / 2.0 * s * h / 3.0
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_p(2, 0.0), -0.5);
        assert_eq!(legendre_at_zero(2), -0.5);
        assert_eq!(legendre_at_zero(4), 0.375);
        assert_eq!(legendre_at_zero(3), 0.0);
        for l in 0..10 {
            assert!((legendre_p(l, 0.0) - legendre_at_zero(l)).abs() < 1e-15);
            assert!((legendre_p(l, 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficient_examples() {
        let v = heaviside_coefficients(3, HeavisideMode::Verbatim);
        assert_eq!(v[1], 0.5);
        assert_eq!(v[2], 0.0);
        let o = heaviside_coefficients(3, HeavisideMode::Orthogonal);
        assert_eq!(o[0], 0.5);
        assert_eq!(o[1], 0.75);
        assert_eq!(o[2], 0.0);
        assert_eq!(o[3], -7.0 / 16.0);
    }

    #[test]
    fn orthogonal_matches_numeric_projection() {
        let o = heaviside_coefficients(7, HeavisideMode::Orthogonal);
        for (l, &c) in o.iter().enumerate() {
            assert!((c - projection(l)).abs() < 1e-6, "l={l}");
            if l % 2 == 0 && l > 0 {
                assert!(c.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_series_converges_away_from_the_jump() {
        let err = |r: usize| {
            let c = heaviside_coefficients(r, HeavisideMode::Orthogonal);
            (0..=1000)
                .map(|i| -1.0 + 2.0 * i as f64 / 1000.0)
                .filter(|x: &f64| x.abs() >= 0.05)
                .map(|x| (heaviside_series(&c, x) - if x >= 0.0 { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e3, e5) = (err(1), err(3), err(5));
        assert!(e1 > e3 && e3 > e5, "{e1} {e3} {e5}");
    }
}
