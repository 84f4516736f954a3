//! Confusion matrices with rows as predicted classes and columns as actual
//! classes: precision is read along a row, recall down a column.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::percent;
use crate::error::{Error, Result};
use crate::geometry::ComponentClass;
use crate::labels::ClassMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `counts[predicted][actual]`.
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        Self {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn components() -> Self {
        Self::new(ComponentClass::ALL.iter().map(|c| c.name().to_string()).collect())
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = classes.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig(format!("confusion counts must be {n}x{n}")));
        }
        Ok(Self { classes, counts })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn add(&mut self, predicted: usize, actual: usize) -> Result<()> {
        let n = self.len();
        if predicted >= n || actual >= n {
            return Err(Error::InvalidConfig(format!(
                "class pair ({predicted}, {actual}) outside a {n}-class matrix"
            )));
        }
        self.counts[predicted][actual] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, r: usize) -> u64 {
        self.counts[r].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|row| row[c]).sum()
    }

    /// Precision of predicted class `r`; `None` when nothing was predicted as it.
    pub fn precision(&self, r: usize) -> Option<f64> {
        let s = self.row_sum(r);
        (s > 0).then(|| self.counts[r][r] as f64 / s as f64)
    }

    /// Recall of actual class `c`; `None` when the class never occurs.
    pub fn recall(&self, c: usize) -> Option<f64> {
        let s = self.col_sum(c);
        (s > 0).then(|| self.counts[c][c] as f64 / s as f64)
    }

    pub fn precisions(&self) -> Vec<Option<f64>> {
        (0..self.len()).map(|i| self.precision(i)).collect()
    }

    pub fn recalls(&self) -> Vec<Option<f64>> {
        (0..self.len()).map(|i| self.recall(i)).collect()
    }

    /// Fraction of samples on the diagonal.
    pub fn accuracy(&self) -> Option<f64> {
        let t = self.total();
        (t > 0).then(|| (0..self.len()).map(|i| self.counts[i][i]).sum::<u64>() as f64 / t as f64)
    }
}

impl fmt::Display for ConfusionMatrix {
    /// Aligned table: one row per predicted class with its precision, then a
    /// recall row under the actual-class columns.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.len();
        let first = self
            .classes
            .iter()
            .map(String::len)
            .chain(["predicted \\ actual".len(), "recall".len()])
            .max()
            .unwrap_or(0);
        let col = self.classes.iter().map(String::len).chain([9]).max().unwrap_or(9);
        write!(f, "{:<first$}", "predicted \\ actual")?;
        for c in &self.classes {
            write!(f, "  {c:>col$}")?;
        }
        writeln!(f, "  {:>col$}", "precision")?;
        for r in 0..n {
            write!(f, "{:<first$}", self.classes[r])?;
            for c in 0..n {
                write!(f, "  {:>col$}", self.counts[r][c])?;
            }
            writeln!(f, "  {:>col$}", percent(self.precision(r)))?;
        }
        write!(f, "{:<first$}", "recall")?;
        for c in 0..n {
            write!(f, "  {:>col$}", percent(self.recall(c)))?;
        }
        writeln!(f)
    }
}

/// 4x4 matrix over the component classes from `(predicted, actual)` pairs.
pub fn confusion_matrix(pairs: &[(ComponentClass, ComponentClass)]) -> ConfusionMatrix {
    let mut m = ConfusionMatrix::components();
    for &(p, a) in pairs {
        m.counts[p.index()][a.index()] += 1;
    }
    m
}

/// Reads `predicted actual` lines, each token a class name or id of `classes`.
pub fn parse_pairs(text: &str, source: &str, classes: &ClassMap) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::parse(source, i + 1, format!("expected 'predicted actual', found {} fields", fields.len())));
        }
        let resolve = |t: &str| {
            classes
                .resolve(t)
                .ok_or_else(|| Error::parse(source, i + 1, format!("unknown class '{t}'")))
        };
        out.push((resolve(fields[0])?, resolve(fields[1])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs_from_rows(rows: [[u64; 4]; 4]) -> Vec<(ComponentClass, ComponentClass)> {
        let mut out = Vec::new();
        for (p, row) in rows.iter().enumerate() {
            for (a, &n) in row.iter().enumerate() {
                for _ in 0..n {
                    out.push((ComponentClass::ALL[p], ComponentClass::ALL[a]));
                }
            }
        }
        out
    }

    fn pct(v: Option<f64>) -> f64 {
        v.unwrap() * 100.0
    }

    #[test]
    fn first_test_set_table() {
        let m = confusion_matrix(&pairs_from_rows([[8, 0, 11, 0], [0, 1, 1, 1], [1, 0, 2, 0], [1, 1, 0, 9]]));
        let want_p = [42.11, 33.33, 66.67, 81.82];
        let want_r = [80.0, 50.0, 14.29, 90.0];
        for i in 0..4 {
            assert!((pct(m.precision(i)) - want_p[i]).abs() < 0.01);
            assert!((pct(m.recall(i)) - want_r[i]).abs() < 0.01);
        }
        assert_eq!(m.total(), 36);
    }

    #[test]
    fn third_test_set_table() {
        let m = confusion_matrix(&pairs_from_rows([[19, 0, 15, 4], [0, 0, 1, 0], [0, 0, 0, 0], [2, 0, 0, 9]]));
        assert!((pct(m.precision(0)) - 50.0).abs() < 0.01);
        assert_eq!(m.precision(1), Some(0.0));
        assert_eq!(m.precision(2), None);
        assert!((pct(m.recall(0)) - 90.48).abs() < 0.01);
        assert_eq!(m.recall(1), None);
        assert_eq!(m.recall(2), Some(0.0));
    }

    #[test]
    fn identity_matrix() {
        let pairs: Vec<_> = ComponentClass::ALL.iter().flat_map(|&c| [(c, c), (c, c)]).collect();
        let m = confusion_matrix(&pairs);
        for i in 0..4 {
            assert_eq!((m.precision(i), m.recall(i)), (Some(1.0), Some(1.0)));
        }
        assert_eq!(m.accuracy(), Some(1.0));
    }

    #[test]
    fn table_rendering_marks_na() {
        let m = confusion_matrix(&[(ComponentClass::Antenna, ComponentClass::Antenna)]);
        let text = m.to_string();
        assert!(text.contains("100.00%"));
        assert!(text.contains("N/A"));
        // the recall row has no precision column
        let widths: Vec<usize> = text.lines().take(5).map(str::len).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{text}");
    }

    #[test]
    fn pairs_file() {
        let map = ClassMap::components();
        let p = parse_pairs("antenna thruster\n# c\n3 solar_panel\n", "p", &map).unwrap();
        assert_eq!(p, vec![(0, 2), (3, 3)]);
        assert!(parse_pairs("antenna wheel\n", "p", &map).unwrap_err().to_string().starts_with("p:1:"));
        assert!(ConfusionMatrix::from_counts(vec!["a".into()], vec![vec![1, 2]]).is_err());
    }

    proptest! {
        #[test]
        fn mass_and_margins(pairs in prop::collection::vec((0usize..4, 0usize..4), 0..200)) {
            let typed: Vec<_> = pairs.iter().map(|&(p, a)| (ComponentClass::ALL[p], ComponentClass::ALL[a])).collect();
            let m = confusion_matrix(&typed);
            prop_assert_eq!(m.total(), pairs.len() as u64);
            for k in 0..4 {
                prop_assert_eq!(m.row_sum(k), pairs.iter().filter(|p| p.0 == k).count() as u64);
                prop_assert_eq!(m.col_sum(k), pairs.iter().filter(|p| p.1 == k).count() as u64);
                for v in [m.precision(k), m.recall(k)].into_iter().flatten() {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
}
