use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationMethod {
    /// Quantile bins: label = ⌊rank·B/n⌋ where tied values share the rank of
    /// their first occurrence in sorted order.
    #[default]
    EqualFrequency,
    /// Supervised entropy splits kept only while they pass the MDL test.
    FayyadIraniMdl,
}

impl std::str::FromStr for DiscretizationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-frequency" | "equal_frequency" => Ok(DiscretizationMethod::EqualFrequency),
            "mdl" | "fayyad-irani-mdl" | "fayyad_irani_mdl" => Ok(DiscretizationMethod::FayyadIraniMdl),
            other => Err(Error::Config(format!("unknown discretization method `{other}`"))),
        }
    }
}

/// Maps a continuous column to labels in `0..n_bins`. The MDL method needs
/// class labels for every row in `target`.
pub fn discretize(column: &[f64], n_bins: usize, method: DiscretizationMethod, target: Option<&[usize]>) -> Result<Vec<usize>> {
    if n_bins < 2 {
        return Err(Error::Config(format!("discretization needs at least 2 bins, got {n_bins}")));
    }
    if column.is_empty() {
        return Err(Error::EmptyInput("column to discretize"));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("column to discretize"));
    }
    if column.iter().all(|v| *v == column[0]) {
        log::warn!("constant column discretized to a single bin");
        return Ok(vec![0; column.len()]);
    }
    match method {
        DiscretizationMethod::EqualFrequency => Ok(equal_frequency(column, n_bins)),
        DiscretizationMethod::FayyadIraniMdl => {
            let target = target.ok_or_else(|| Error::Config("MDL discretization needs target labels".into()))?;
            if target.len() != column.len() {
                return Err(Error::DimensionMismatch {
                    context: "MDL target labels",
                    expected: column.len(),
                    got: target.len(),
                });
            }
            let cuts = mdl_cuts(column, target, n_bins - 1);
            Ok(column.iter().map(|v| cuts.iter().filter(|c| *c < v).count()).collect())
        }
    }
}

fn equal_frequency(column: &[f64], n_bins: usize) -> Vec<usize> {
    let n = column.len();
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    column
        .iter()
        .map(|v| {
            let rank = sorted.partition_point(|s| s < v);
            (rank * n_bins / n).min(n_bins - 1)
        })
        .collect()
}

fn entropy_bits(counts: &[usize], total: usize) -> f64 {
    let n = total as f64;
    counts
        .iter()
        .filter(|c| **c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

struct Split {
    gain: f64,
    /// first sorted position of the right part
    at: usize,
    lo: usize,
    hi: usize,
}

/// Best entropy split of sorted positions `lo..hi`, if it passes the MDL test.
fn best_split(values: &[f64], classes: &[usize], n_classes: usize, lo: usize, hi: usize) -> Option<Split> {
    let n = hi - lo;
    if n < 2 {
        return None;
    }
    let mut total = vec![0; n_classes];
    for &c in &classes[lo..hi] {
        total[c] += 1;
    }
    let ent = entropy_bits(&total, n);
    let mut left = vec![0; n_classes];
    let mut best: Option<(f64, usize)> = None;
    for i in lo + 1..hi {
        left[classes[i - 1]] += 1;
        if values[i - 1] == values[i] {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let nl = i - lo;
        let w = (nl as f64 * entropy_bits(&left, nl) + (n - nl) as f64 * entropy_bits(&right, n - nl)) / n as f64;
        if best.is_none_or(|(b, _)| w < b) {
            best = Some((w, i));
        }
    }
    let (w, at) = best?;
    let distinct = |c: &[usize]| c.iter().filter(|x| **x > 0).count() as f64;
    let mut lc = vec![0; n_classes];
    for &c in &classes[lo..at] {
        lc[c] += 1;
    }
    let rc: Vec<usize> = total.iter().zip(&lc).map(|(t, l)| t - l).collect();
    let (k, k1, k2) = (distinct(&total), distinct(&lc), distinct(&rc));
    let (e1, e2) = (entropy_bits(&lc, at - lo), entropy_bits(&rc, hi - at));
    let delta = (3f64.powf(k) - 2.0).log2() - (k * ent - k1 * e1 - k2 * e2);
    let gain = ent - w;
    let threshold = (((n - 1) as f64).log2() + delta) / n as f64;
    (gain > threshold).then_some(Split { gain, at, lo, hi })
}

/// Accepted cut points in ascending order. Splits are applied best-gain first
/// until `max_cuts` is reached or no segment passes the MDL test.
fn mdl_cuts(column: &[f64], target: &[usize], max_cuts: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..column.len()).collect();
    idx.sort_by(|a, b| column[*a].total_cmp(&column[*b]).then(a.cmp(b)));
    let values: Vec<f64> = idx.iter().map(|i| column[*i]).collect();
    let classes: Vec<usize> = idx.iter().map(|i| target[*i]).collect();
    let n_classes = classes.iter().max().map_or(1, |m| m + 1);

    let mut cuts = Vec::new();
    let mut pending: Vec<Split> = best_split(&values, &classes, n_classes, 0, values.len()).into_iter().collect();
    while cuts.len() < max_cuts && !pending.is_empty() {
        let pick = (0..pending.len())
            .max_by(|a, b| pending[*a].gain.total_cmp(&pending[*b].gain).then(pending[*b].at.cmp(&pending[*a].at)))
            .expect("nonempty");
        let s = pending.swap_remove(pick);
        cuts.push(0.5 * (values[s.at - 1] + values[s.at]));
        pending.extend(best_split(&values, &classes, n_classes, s.lo, s.at));
        pending.extend(best_split(&values, &classes, n_classes, s.at, s.hi));
    }
    cuts.sort_by(f64::total_cmp);
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_value_per_bin() {
        let labels = discretize(&[1.0, 2.0, 3.0, 4.0, 5.0], 5, DiscretizationMethod::EqualFrequency, None).unwrap();
        assert_eq!(labels, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn constant_column_is_single_bin() {
        for method in [DiscretizationMethod::EqualFrequency, DiscretizationMethod::FayyadIraniMdl] {
            let labels = discretize(&[2.5; 7], 5, method, Some(&[0, 1, 0, 1, 0, 1, 0])).unwrap();
            assert_eq!(labels, vec![0; 7]);
        }
    }

    #[test]
    fn quintile_counts() {
        // 40 distinct values in scrambled order
        let column: Vec<f64> = (0..40).map(|i| ((i * 17) % 40) as f64 * 0.37 - 3.0).collect();
        let labels = discretize(&column, 5, DiscretizationMethod::EqualFrequency, None).unwrap();
        let mut counts = [0; 5];
        for l in &labels {
            counts[*l] += 1;
        }
        assert_eq!(counts, [8; 5]);
        // every label-k value lies between the k-th and (k+1)-th quintile of the sorted column
        let mut sorted = column.clone();
        sorted.sort_by(f64::total_cmp);
        for (v, l) in column.iter().zip(&labels) {
            assert!(*v >= sorted[8 * l] && *v <= sorted[8 * l + 7]);
        }
    }

    #[test]
    fn ties_share_a_bin() {
        let labels = discretize(&[1.0, 1.0, 1.0, 2.0, 3.0, 4.0], 3, DiscretizationMethod::EqualFrequency, None).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 2, 2]);
    }

    #[test]
    fn mdl_finds_class_boundary() {
        let column: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let target: Vec<usize> = (0..30).map(|i| usize::from(i >= 12)).collect();
        let labels = discretize(&column, 5, DiscretizationMethod::FayyadIraniMdl, Some(&target)).unwrap();
        assert_eq!(labels, target);
    }

    #[test]
    fn mdl_rejects_uninformative_split() {
        let column: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let target: Vec<usize> = (0..12).map(|i| i % 2).collect();
        let labels = discretize(&column, 5, DiscretizationMethod::FayyadIraniMdl, Some(&target)).unwrap();
        assert_eq!(labels, vec![0; 12]);
    }

    #[test]
    fn mdl_respects_cut_cap() {
        let column: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let target: Vec<usize> = (0..60).map(|i| i / 10).collect();
        let labels = discretize(&column, 3, DiscretizationMethod::FayyadIraniMdl, Some(&target)).unwrap();
        assert!(labels.iter().all(|l| *l < 3));
        assert_eq!(labels.iter().max(), Some(&2));
        let full = discretize(&column, 10, DiscretizationMethod::FayyadIraniMdl, Some(&target)).unwrap();
        assert_eq!(full, target);
    }

    #[test]
    fn mdl_needs_target() {
        assert!(matches!(
            discretize(&[1.0, 2.0], 2, DiscretizationMethod::FayyadIraniMdl, None),
            Err(Error::Config(_))
        ));
        assert!(matches!(discretize(&[1.0, 2.0], 1, DiscretizationMethod::EqualFrequency, None), Err(Error::Config(_))));
    }
}
