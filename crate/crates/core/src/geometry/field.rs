use super::grid::Grid;

/// Values attached to a subset of grid nodes; undefined nodes hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    grid: Grid,
    values: Vec<Option<T>>,
}

impl<T> GridField<T> {
    pub fn empty(grid: Grid) -> Self {
        let values = std::iter::repeat_with(|| None).take(grid.len()).collect();
        Self { grid, values }
    }

    /// Panics if `values` does not have one entry per node.
    pub fn from_options(grid: Grid, values: Vec<Option<T>>) -> Self {
        assert_eq!(values.len(), grid.len(), "field length must match the grid");
        Self { grid, values }
    }

    pub fn full(grid: Grid, values: Vec<T>) -> Self {
        Self::from_options(grid, values.into_iter().map(Some).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, flat: usize) -> Option<&T> {
        self.values.get(flat).and_then(Option::as_ref)
    }

    pub fn set(&mut self, flat: usize, value: T) {
        self.values[flat] = Some(value);
    }

    pub fn values(&self) -> &[Option<T>] {
        &self.values
    }

    /// Defined entries with their flat indices, in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (i, v)))
    }

    pub fn defined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> GridField<U> {
        GridField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.as_ref().map(&f)).collect(),
        }
    }

    pub fn filter_map<U>(&self, f: impl Fn(&T) -> Option<U>) -> GridField<U> {
        GridField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.as_ref().and_then(&f)).collect(),
        }
    }

    /// Keeps only nodes at least `margin` cells inside the grid.
    pub fn restricted(mut self, margin: usize) -> Self {
        for (i, v) in self.values.iter_mut().enumerate() {
            if !self.grid.is_interior(i, margin) {
                *v = None;
            }
        }
        self
    }
}

impl GridField<f64> {
    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    pub fn mean_abs(&self) -> f64 {
        let count = self.defined_count();
        if count == 0 {
            return 0.0;
        }
        self.iter().map(|(_, v)| v.abs()).sum::<f64>() / count as f64
    }

    pub fn min(&self) -> Option<f64> {
        self.iter().map(|(_, v)| *v).reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.iter().map(|(_, v)| *v).reduce(f64::max)
    }
}
