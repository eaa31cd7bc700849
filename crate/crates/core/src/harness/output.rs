//! Result files: daily CSVs, summary CSVs and training curves. All output
//! is written with explicit formatting so identical runs produce identical
//! bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DailyResult, EpisodeStat, HarnessError, Summary};

/// One row per day: date, pnl, average spread, normalised pnl, mean
/// absolute position, fill count and closing inventory.
pub fn daily_results_csv(results: &[DailyResult]) -> String {
    let mut out = String::from("date,pnl,avg_spread,nd_pnl,map,fills,final_inventory\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{},{}",
            r.date, r.pnl, r.avg_spread, r.nd_pnl, r.map, r.fills, r.final_inventory
        );
    }
    out
}

pub fn write_daily_results(
    path: impl AsRef<Path>,
    results: &[DailyResult],
) -> Result<(), HarnessError> {
    fs::write(path, daily_results_csv(results))?;
    Ok(())
}

/// Labelled summary rows (mean and dispersion of the daily metrics).
pub fn summary_csv(rows: &[(String, Summary)]) -> String {
    let mut out = String::from("strategy,days,nd_pnl_mean,nd_pnl_std,map_mean,map_mad\n");
    for (label, s) in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6}",
            label, s.days, s.nd_pnl_mean, s.nd_pnl_std, s.map_mean, s.map_mad
        );
    }
    out
}

pub fn write_summary(
    path: impl AsRef<Path>,
    rows: &[(String, Summary)],
) -> Result<(), HarnessError> {
    fs::write(path, summary_csv(rows))?;
    Ok(())
}

/// Per-episode reward with rolling mean and rolling standard deviation
/// over `window` episodes, for training-curve plots.
pub fn training_curve_csv(episodes: &[EpisodeStat], window: usize) -> String {
    let window = window.max(1);
    let mut out =
        String::from("episode,day,epsilon,reward,rolling_mean,rolling_std,nd_pnl,map\n");
    for (i, e) in episodes.iter().enumerate() {
        let start = (i + 1).saturating_sub(window);
        let slice: Vec<f64> = episodes[start..=i].iter().map(|s| s.reward).collect();
        let n = slice.len() as f64;
        let mean = slice.iter().sum::<f64>() / n;
        let var = slice.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            e.episode,
            e.day,
            e.epsilon,
            e.reward,
            mean,
            var.sqrt(),
            e.nd_pnl,
            e.map
        );
    }
    out
}

pub fn write_training_curve(
    path: impl AsRef<Path>,
    episodes: &[EpisodeStat],
    window: usize,
) -> Result<(), HarnessError> {
    fs::write(path, training_curve_csv(episodes, window))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(nd: f64) -> DailyResult {
        DailyResult {
            date: "syn-0000".into(),
            pnl_ht: 80,
            pnl: 10.0,
            avg_spread: 0.5,
            nd_pnl: nd,
            map: 12.5,
            fills: 3,
            final_inventory: -100,
        }
    }

    #[test]
    fn daily_csv_shape() {
        let csv = daily_results_csv(&[day(20.0)]);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "date,pnl,avg_spread,nd_pnl,map,fills,final_inventory");
        assert_eq!(lines.next().unwrap(), "syn-0000,10.000000,0.500000,20.000000,12.500000,3,-100");
        assert!(lines.next().is_none());
    }

    #[test]
    fn curve_rolling_stats() {
        let eps: Vec<EpisodeStat> = (0..4)
            .map(|i| EpisodeStat {
                episode: i,
                day: "d".into(),
                epsilon: 0.5,
                reward: (i + 1) as f64,
                nd_pnl: 0.0,
                map: 0.0,
            })
            .collect();
        let csv = training_curve_csv(&eps, 2);
        let last = csv.lines().last().unwrap();
        // rewards [3, 4]: mean 3.5, population std 0.5
        assert!(last.contains(",3.500000,0.500000,"), "line was {last}");
    }
}
