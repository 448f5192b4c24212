//! Monthly harmful-content series, an event-window delta, and a Granger
//! causality test between two synthetic series.
//!
//! Run with: cargo run --example timeseries_analysis

use chrono::{TimeZone, Utc};
use hatemtl::analysis::{event_window_delta, granger, monthly_series, pearson};

fn main() {
    // 24 months of posts: harmful volume jumps after month 12 (the "event")
    let mut posts = Vec::new();
    for m in 0..24u32 {
        let (year, month) = (2022 + (m / 12) as i32, m % 12 + 1);
        let harmful = if m >= 12 { 9 + (m % 3) as usize } else { 3 + (m % 3) as usize };
        for d in 0..harmful {
            let ts = Utc
                .with_ymd_and_hms(year, month, d as u32 + 1, 10, 0, 0)
                .unwrap();
            posts.push((ts, 1));
        }
        posts.push((Utc.with_ymd_and_hms(year, month, 28, 10, 0, 0).unwrap(), 0));
    }
    let series = monthly_series(&posts);
    println!("{} months from {}-{:02}", series.len(), series[0].year, series[0].month);

    let delta = event_window_delta(&series, 2023, 1).unwrap();
    println!(
        "event 2023-01: mean harmful before {:.2}, after {:.2}, delta {:+.2}",
        delta.before_mean, delta.after_mean, delta.delta
    );

    // driver series x and a response y that echoes x one month later
    let x: Vec<f64> = (0..24).map(|m| ((m as f64) * 0.9).sin() * 5.0 + 10.0).collect();
    let y: Vec<f64> = (0..24)
        .map(|m| if m == 0 { 10.0 } else { x[m - 1] + 0.1 * (m as f64).cos() })
        .collect();
    println!("pearson(x, y) = {:.4}", pearson(&x, &y).unwrap());
    let test = granger(&x, &y, 1).unwrap();
    println!(
        "granger lag 1: F = {:.2} (df {}, {}), p = {:.2e}",
        test.f_stat, test.df1, test.df2, test.p_value
    );
}
