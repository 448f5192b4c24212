//! Corpus comparison and temporal analysis: term profiles, Ruzicka
//! similarity, monthly harmful-content series, event windows, Pearson
//! correlation, and Granger causality.

use std::collections::BTreeMap;

use chrono::{DateTime, Datelike, Utc};
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative token frequencies over whitespace-tokenized (already normalized)
/// texts.
pub fn term_profile<S: AsRef<str>>(texts: &[S]) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for text in texts {
        for tok in text.as_ref().split_whitespace() {
            *counts.entry(tok.to_string()).or_insert(0) += 1;
            total += 1;
        }
    }
    counts
        .into_iter()
        .map(|(t, c)| (t, c as f64 / total as f64))
        .collect()
}

/// Ruzicka (weighted Jaccard) similarity: sum of minima over sum of maxima
/// across the key union. Two empty profiles score 0.
pub fn ruzicka(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut min_sum = 0.0;
    let mut max_sum = 0.0;
    for (key, &va) in a {
        let vb = b.get(key).copied().unwrap_or(0.0);
        min_sum += va.min(vb);
        max_sum += va.max(vb);
    }
    for (key, &vb) in b {
        if !a.contains_key(key) {
            max_sum += vb;
        }
    }
    if max_sum == 0.0 {
        0.0
    } else {
        min_sum / max_sum
    }
}

/// One calendar month of a harmful-content series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonthPoint {
    pub year: i32,
    pub month: u32,
    pub harmful: usize,
    pub total: usize,
}

fn month_key(ts: &DateTime<Utc>) -> (i32, u32) {
    (ts.year(), ts.month())
}

fn next_month(year: i32, month: u32) -> (i32, u32) {
    if month == 12 {
        (year + 1, 1)
    } else {
        (year, month + 1)
    }
}

/// Count harmful posts per UTC calendar month. The span runs from the
/// earliest to the latest post month with empty months zero-filled, so the
/// series has no gaps.
pub fn monthly_series(posts: &[(DateTime<Utc>, usize)]) -> Vec<MonthPoint> {
    if posts.is_empty() {
        return Vec::new();
    }
    let mut per_month: BTreeMap<(i32, u32), (usize, usize)> = BTreeMap::new();
    for (ts, label) in posts {
        let slot = per_month.entry(month_key(ts)).or_insert((0, 0));
        slot.1 += 1;
        if *label == crate::data::HARMFUL {
            slot.0 += 1;
        }
    }
    let &first = per_month.keys().next().unwrap();
    let &last = per_month.keys().next_back().unwrap();
    let mut out = Vec::new();
    let (mut year, mut month) = first;
    loop {
        let (harmful, total) = per_month.get(&(year, month)).copied().unwrap_or((0, 0));
        out.push(MonthPoint {
            year,
            month,
            harmful,
            total,
        });
        if (year, month) == last {
            break;
        }
        let n = next_month(year, month);
        year = n.0;
        month = n.1;
    }
    out
}

/// Mean monthly harmful counts around an event: the three months strictly
/// before the event month against the event month plus the two after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventWindowDelta {
    pub before_mean: f64,
    pub after_mean: f64,
    pub delta: f64,
}

pub fn event_window_delta(
    series: &[MonthPoint],
    event_year: i32,
    event_month: u32,
) -> Result<EventWindowDelta> {
    let idx = series
        .iter()
        .position(|p| p.year == event_year && p.month == event_month)
        .ok_or_else(|| {
            Error::Config(format!("event month {event_year}-{event_month:02} outside the series"))
        })?;
    if idx < 3 || idx + 3 > series.len() {
        return Err(Error::Config(format!(
            "event month {event_year}-{event_month:02} needs 3 months before and 2 after inside the series"
        )));
    }
    let mean = |pts: &[MonthPoint]| {
        pts.iter().map(|p| p.harmful as f64).sum::<f64>() / pts.len() as f64
    };
    let before_mean = mean(&series[idx - 3..idx]);
    let after_mean = mean(&series[idx..idx + 3]);
    Ok(EventWindowDelta {
        before_mean,
        after_mean,
        delta: after_mean - before_mean,
    })
}

/// Pearson correlation; errors when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), y.len(), "series lengths differ: {} vs {}", x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first series is constant".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second series is constant".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Regularized incomplete beta function `I_x(a, b)`, the kernel of the
/// F-distribution tail used by the Granger test.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    statrs::function::beta::beta_reg(a, b, x)
}

/// Least squares via Householder QR with column pivoting. Returns the
/// coefficient vector and the residual sum of squares. A pivot column whose
/// remaining norm falls below `1e-10` of the leading pivot makes the design
/// matrix rank deficient.
fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let t = a.len();
    assert!(t > 0, "empty design matrix");
    let k = a[0].len();
    assert!(t >= k, "more columns ({k}) than rows ({t})");
    assert_eq!(b.len(), t);

    let mut r: Vec<Vec<f64>> = a.to_vec();
    let mut qtb = b.to_vec();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut lead = 0.0f64;

    for j in 0..k {
        // pivot on the remaining column with the largest trailing norm
        let (pj, best_sq) = (j..k)
            .map(|c| (c, (j..t).map(|i| r[i][c] * r[i][c]).sum::<f64>()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pj != j {
            for row in r.iter_mut() {
                row.swap(j, pj);
            }
            perm.swap(j, pj);
        }
        let norm = best_sq.sqrt();
        if j == 0 {
            lead = norm;
        }
        if norm <= 1e-10 * lead {
            return Err(Error::SingularMatrix(format!(
                "pivot {j} norm {norm:.3e} below threshold"
            )));
        }

        // Householder reflector for column j over rows j..t
        let alpha = if r[j][j] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (j..t).map(|i| r[i][j]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            for c in j..k {
                let dot: f64 = (j..t).map(|i| v[i - j] * r[i][c]).sum();
                let s = 2.0 * dot / vtv;
                for i in j..t {
                    r[i][c] -= s * v[i - j];
                }
            }
            let dot: f64 = (j..t).map(|i| v[i - j] * qtb[i]).sum();
            let s = 2.0 * dot / vtv;
            for i in j..t {
                qtb[i] -= s * v[i - j];
            }
        }
        r[j][j] = alpha;
        for i in j + 1..t {
            r[i][j] = 0.0;
        }
    }

    // back substitution, then undo the column permutation
    let mut xp = vec![0.0f64; k];
    for j in (0..k).rev() {
        let mut s = qtb[j];
        for c in j + 1..k {
            s -= r[j][c] * xp[c];
        }
        xp[j] = s / r[j][j];
    }
    let mut x = vec![0.0f64; k];
    for j in 0..k {
        x[perm[j]] = xp[j];
    }
    let rss: f64 = qtb[k..].iter().map(|v| v * v).sum();
    Ok((x, rss))
}

/// Granger causality test of "x helps predict y" at the given lag order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrangerTest {
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub df1: usize,
    pub df2: usize,
    pub rss_restricted: f64,
    pub rss_unrestricted: f64,
}

/// Fit `y_t = c + sum a_j y_(t-j) + sum b_j x_(t-j)` against the restricted
/// model without the x terms and compare residual sums of squares with an
/// F-test. The p-value is the F tail via the regularized incomplete beta.
pub fn granger(x: &[f64], y: &[f64], lag: usize) -> Result<GrangerTest> {
    assert_eq!(x.len(), y.len(), "series lengths differ");
    assert!(lag >= 1, "lag must be at least 1");
    let t = y.len().saturating_sub(lag);
    // df2 = T - 2*lag - 1 must stay positive
    if t < 2 * lag + 2 {
        return Err(Error::SeriesTooShort {
            have: y.len(),
            lag,
        });
    }

    let mut rows_u = Vec::with_capacity(t);
    let mut rows_r = Vec::with_capacity(t);
    let mut target = Vec::with_capacity(t);
    for i in lag..y.len() {
        let mut row = vec![1.0];
        for j in 1..=lag {
            row.push(y[i - j]);
        }
        rows_r.push(row.clone());
        for j in 1..=lag {
            row.push(x[i - j]);
        }
        rows_u.push(row);
        target.push(y[i]);
    }

    let (_, rss_u) = least_squares(&rows_u, &target)?;
    let (_, rss_r) = least_squares(&rows_r, &target)?;

    let df1 = lag;
    let df2 = t - 2 * lag - 1;
    let f_stat = ((rss_r - rss_u).max(0.0) / df1 as f64) / (rss_u / df2 as f64);
    let (d1, d2) = (df1 as f64, df2 as f64);
    let p_value = beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f_stat));
    Ok(GrangerTest {
        lag,
        f_stat,
        p_value,
        df1,
        df2,
        rss_restricted: rss_r,
        rss_unrestricted: rss_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn profile(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
    }

    #[test]
    fn ruzicka_hand_case() {
        let a = profile(&[("x", 0.4), ("y", 0.6)]);
        let b = profile(&[("x", 0.8), ("y", 0.2)]);
        assert!((ruzicka(&a, &b) - 0.6 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn ruzicka_edges() {
        let empty = BTreeMap::new();
        assert_eq!(ruzicka(&empty, &empty), 0.0);
        let a = profile(&[("x", 0.5), ("y", 0.5)]);
        assert!((ruzicka(&a, &a) - 1.0).abs() < 1e-12);
        let b = profile(&[("z", 1.0)]);
        assert_eq!(ruzicka(&a, &b), 0.0);
    }

    #[test]
    fn term_profile_relative_frequencies() {
        let p = term_profile(&["a b a", "b c"]);
        assert!((p["a"] - 0.4).abs() < 1e-12);
        assert!((p["b"] - 0.4).abs() < 1e-12);
        assert!((p["c"] - 0.2).abs() < 1e-12);
    }

    fn ts(y: i32, m: u32, d: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(y, m, d, 12, 0, 0).unwrap()
    }

    #[test]
    fn monthly_series_zero_fills_gaps() {
        let posts = vec![
            (ts(2020, 1, 5), 1),
            (ts(2020, 1, 9), 0),
            (ts(2020, 4, 2), 1),
        ];
        let series = monthly_series(&posts);
        assert_eq!(series.len(), 4);
        assert_eq!(series[0], MonthPoint { year: 2020, month: 1, harmful: 1, total: 2 });
        assert_eq!(series[1].harmful, 0);
        assert_eq!(series[1].total, 0);
        assert_eq!(series[3], MonthPoint { year: 2020, month: 4, harmful: 1, total: 1 });
    }

    #[test]
    fn monthly_series_crosses_year_boundary() {
        let posts = vec![(ts(2019, 11, 1), 1), (ts(2020, 2, 1), 1)];
        let series = monthly_series(&posts);
        let months: Vec<(i32, u32)> = series.iter().map(|p| (p.year, p.month)).collect();
        assert_eq!(months, vec![(2019, 11), (2019, 12), (2020, 1), (2020, 2)]);
    }

    #[test]
    fn event_window_hand_case() {
        let series: Vec<MonthPoint> = (1..=8)
            .map(|m| MonthPoint { year: 2021, month: m, harmful: m as usize, total: 10 })
            .collect();
        // event at month 4: before = months 1..3 mean 2, after = 4..6 mean 5
        let d = event_window_delta(&series, 2021, 4).unwrap();
        assert_eq!(d.before_mean, 2.0);
        assert_eq!(d.after_mean, 5.0);
        assert_eq!(d.delta, 3.0);
        assert!(event_window_delta(&series, 2021, 2).is_err());
        assert!(event_window_delta(&series, 2021, 7).is_err());
        assert!(event_window_delta(&series, 2022, 1).is_err());
    }

    #[test]
    fn pearson_perfect_and_constant() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-12);
        let c = vec![5.0; 4];
        assert!(matches!(pearson(&x, &c), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn least_squares_recovers_exact_line() {
        // y = 2 + 3x, overdetermined but consistent
        let a: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let b: Vec<f64> = (0..5).map(|i| 2.0 + 3.0 * i as f64).collect();
        let (coef, rss) = least_squares(&a, &b).unwrap();
        assert!((coef[0] - 2.0).abs() < 1e-10);
        assert!((coef[1] - 3.0).abs() < 1e-10);
        assert!(rss < 1e-18);
    }

    #[test]
    fn least_squares_rejects_collinear_columns() {
        let a: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![1.0, i as f64, 2.0 * i as f64])
            .collect();
        let b = vec![1.0; 6];
        assert!(matches!(least_squares(&a, &b), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn granger_detects_lagged_copy() {
        // y_t = x_(t-1) exactly: x must be found causal
        let x: Vec<f64> = (0..40).map(|i| ((i * 37 % 17) as f64).sin()).collect();
        let mut y = vec![0.0];
        y.extend(x[..39].iter().copied());
        let test = granger(&x, &y, 1).unwrap();
        assert!(test.p_value < 1e-6, "p = {}", test.p_value);
    }

    #[test]
    fn granger_too_short_series() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let y = vec![4.0, 3.0, 2.0, 1.0];
        assert!(matches!(granger(&x, &y, 2), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn granger_constant_regressor_is_singular() {
        let x = vec![1.0; 20];
        let y: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        assert!(matches!(granger(&x, &y, 1), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn beta_reg_uniform_identity() {
        for &x in &[0.0, 0.25, 0.5, 0.9, 1.0] {
            assert!((beta_reg(1.0, 1.0, x) - x).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn ruzicka_symmetric_and_bounded(
            a in proptest::collection::btree_map("[a-e]", 0.0f64..1.0, 0..6),
            b in proptest::collection::btree_map("[a-e]", 0.0f64..1.0, 0..6),
        ) {
            let ab = ruzicka(&a, &b);
            let ba = ruzicka(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn pearson_affine_invariant(
            xs in proptest::collection::vec(-10.0f64..10.0, 4..20),
            scale in 0.1f64..5.0,
            shift in -10.0f64..10.0,
        ) {
            let ys: Vec<f64> = xs.iter().map(|v| v * v + 1.0).collect();
            if let (Ok(r1), Ok(r2)) = (
                pearson(&xs, &ys),
                pearson(&xs.iter().map(|v| scale * v + shift).collect::<Vec<_>>(), &ys),
            ) {
                prop_assert!((r1 - r2).abs() < 1e-6);
            }
        }
    }
}
