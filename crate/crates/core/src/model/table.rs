use std::cmp::Ordering;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("table length mismatch: expected {expected} entries, found {found}")]
pub struct TableShapeError {
    pub expected: usize,
    pub found: usize,
}

/// Potentials over the cross product of argument ranges.
///
/// Values are stored row-major with the last argument varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    range_sizes: Vec<usize>,
    values: Vec<f64>,
}

impl PotentialTable {
    pub fn new(range_sizes: Vec<usize>, values: Vec<f64>) -> Result<Self, TableShapeError> {
        let expected = range_sizes.iter().product::<usize>();
        if expected != values.len() {
            return Err(TableShapeError {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            range_sizes,
            values,
        })
    }

    pub fn arity(&self) -> usize {
        self.range_sizes.len()
    }

    pub fn range_sizes(&self) -> &[usize] {
        &self.range_sizes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.range_sizes)
    }

    pub fn flat_index(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.range_sizes.len());
        let mut idx = 0;
        for (a, r) in assignment.iter().zip(&self.range_sizes) {
            debug_assert!(a < r);
            idx = idx * r + a;
        }
        idx
    }

    pub fn value(&self, assignment: &[usize]) -> f64 {
        self.values[self.flat_index(assignment)]
    }

    /// Entry-wise equality within an absolute tolerance. Shapes must match exactly.
    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        self.range_sizes == other.range_sizes
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a == b || (a - b).abs() <= tolerance)
    }

    /// Lexicographic total order over (range sizes, values).
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.range_sizes.cmp(&other.range_sizes).then_with(|| {
            for (a, b) in self.values.iter().zip(&other.values) {
                match a.total_cmp(b) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }

    /// Reorders the arguments: position `p` of the result is position `order[p]` of `self`.
    pub fn permute(&self, order: &[usize]) -> PotentialTable {
        assert_eq!(order.len(), self.arity());
        let sizes: Vec<usize> = order.iter().map(|&q| self.range_sizes[q]).collect();
        let mut values = Vec::with_capacity(self.values.len());
        let mut source = vec![0; self.arity()];
        for_each_assignment(&sizes, |assignment| {
            for (p, &q) in order.iter().enumerate() {
                source[q] = assignment[p];
            }
            values.push(self.value(&source));
        });
        PotentialTable {
            range_sizes: sizes,
            values,
        }
    }
}

pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

/// Visits every assignment over `sizes` in row-major order (last position fastest).
pub fn for_each_assignment(sizes: &[usize], mut visit: impl FnMut(&[usize])) {
    if sizes.contains(&0) {
        return;
    }
    let mut assignment = vec![0; sizes.len()];
    loop {
        visit(&assignment);
        let mut pos = sizes.len();
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < sizes[pos] {
                break;
            }
            assignment[pos] = 0;
        }
    }
}
