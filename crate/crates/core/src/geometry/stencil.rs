//! Second-order central differences on a [`Grid`].
//!
//! Every routine reads values through a lookup `get(flat) -> Option<f64>` so
//! that partially defined fields can be differentiated; a missing neighbour
//! makes the result `None`.

use nalgebra::DMatrix;

use super::grid::Grid;

fn at<F: Fn(usize) -> Option<f64>>(grid: &Grid, get: &F, flat: usize, steps: &[(usize, isize)]) -> Option<f64> {
    let mut idx = flat;
    for &(axis, k) in steps {
        idx = grid.offset(idx, axis, k)?;
    }
    get(idx)
}

/// ∂_i f.
pub fn first<F: Fn(usize) -> Option<f64>>(grid: &Grid, get: &F, flat: usize, i: usize) -> Option<f64> {
    let h = grid.spacing()[i];
    Some((at(grid, get, flat, &[(i, 1)])? - at(grid, get, flat, &[(i, -1)])?) / (2.0 * h))
}

/// ∂_i∂_j f.
pub fn second<F: Fn(usize) -> Option<f64>>(
    grid: &Grid,
    get: &F,
    flat: usize,
    i: usize,
    j: usize,
) -> Option<f64> {
    let hi = grid.spacing()[i];
    if i == j {
        let c = get(flat)?;
        return Some(
            (at(grid, get, flat, &[(i, 1)])? - 2.0 * c + at(grid, get, flat, &[(i, -1)])?) / (hi * hi),
        );
    }
    let hj = grid.spacing()[j];
    let pp = at(grid, get, flat, &[(i, 1), (j, 1)])?;
    let pm = at(grid, get, flat, &[(i, 1), (j, -1)])?;
    let mp = at(grid, get, flat, &[(i, -1), (j, 1)])?;
    let mm = at(grid, get, flat, &[(i, -1), (j, -1)])?;
    Some((pp - pm - mp + mm) / (4.0 * hi * hj))
}

/// ∂_i∂_j∂_k f.
pub fn third<F: Fn(usize) -> Option<f64>>(
    grid: &Grid,
    get: &F,
    flat: usize,
    i: usize,
    j: usize,
    k: usize,
) -> Option<f64> {
    let mut ax = [i, j, k];
    ax.sort_unstable();
    let h = grid.spacing();
    match (ax[0] == ax[1], ax[1] == ax[2]) {
        (true, true) => {
            let a = ax[0];
            let v = |s: isize| at(grid, get, flat, &[(a, s)]);
            Some((v(2)? - 2.0 * v(1)? + 2.0 * v(-1)? - v(-2)?) / (2.0 * h[a].powi(3)))
        }
        (true, false) | (false, true) => {
            // the repeated axis gets the second difference
            let (rep, single) = if ax[0] == ax[1] { (ax[0], ax[2]) } else { (ax[1], ax[0]) };
            let mut total = 0.0;
            for s in [-1isize, 1] {
                let row = |r: isize| at(grid, get, flat, &[(rep, r), (single, s)]);
                total += s as f64 * (row(1)? - 2.0 * row(0)? + row(-1)?);
            }
            Some(total / (h[rep] * h[rep] * 2.0 * h[single]))
        }
        (false, false) => {
            let mut total = 0.0;
            for si in [-1isize, 1] {
                for sj in [-1isize, 1] {
                    for sk in [-1isize, 1] {
                        let v = at(grid, get, flat, &[(ax[0], si), (ax[1], sj), (ax[2], sk)])?;
                        total += (si * sj * sk) as f64 * v;
                    }
                }
            }
            Some(total / (8.0 * h[ax[0]] * h[ax[1]] * h[ax[2]]))
        }
    }
}

pub fn gradient<F: Fn(usize) -> Option<f64>>(grid: &Grid, get: &F, flat: usize) -> Option<Vec<f64>> {
    (0..grid.n()).map(|i| first(grid, get, flat, i)).collect()
}

pub fn hessian<F: Fn(usize) -> Option<f64>>(grid: &Grid, get: &F, flat: usize) -> Option<DMatrix<f64>> {
    let n = grid.n();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = second(grid, get, flat, i, j)?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Some(m)
}

/// Third derivatives as a flat symmetric tensor, entry `[i*n*n + j*n + k]`.
pub fn third_tensor<F: Fn(usize) -> Option<f64>>(grid: &Grid, get: &F, flat: usize) -> Option<Vec<f64>> {
    let n = grid.n();
    let mut t = vec![0.0; n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let v = third(grid, get, flat, i, j, k)?;
                for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    t[a * n * n + b * n + c] = v;
                }
            }
        }
    }
    Some(t)
}

/// Lookup over a dense slice.
pub fn dense(values: &[f64]) -> impl Fn(usize) -> Option<f64> + '_ {
    move |i| values.get(i).copied()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic_grid() -> (Grid, Vec<f64>) {
        let grid = Grid::new(&[-1.0, -1.0, -1.0], &[1.0, 1.0, 1.0], &[9, 9, 9]).unwrap();
        // polynomial of degree 3: all stencils below are exact on it
        let u = (0..grid.len())
            .map(|f| {
                let x = grid.coordinate(f);
                x[0].powi(3) + 2.0 * x[0] * x[0] * x[1] + x[0] * x[1] * x[2] - x[2] * x[2]
            })
            .collect();
        (grid, u)
    }

    #[test]
    fn exact_on_cubics() {
        let (grid, u) = cubic_grid();
        let get = dense(&u);
        let p = grid.flat_index(&[4, 5, 3]);
        let x = grid.coordinate(p);
        let g = gradient(&grid, &get, p).unwrap();
        let expected_g = [
            3.0 * x[0] * x[0] + 4.0 * x[0] * x[1] + x[1] * x[2],
            2.0 * x[0] * x[0] + x[0] * x[2],
            x[0] * x[1] - 2.0 * x[2],
        ];
        for (a, b) in g.iter().zip(expected_g) {
            // the cubic term of ∂₀ carries an h² error term
            assert!((a - b).abs() < 0.1, "{a} vs {b}");
        }
        let hs = hessian(&grid, &get, p).unwrap();
        assert!((hs[(0, 0)] - (6.0 * x[0] + 4.0 * x[1])).abs() < 1e-12);
        assert!((hs[(0, 1)] - (4.0 * x[0] + x[2])).abs() < 1e-12);
        assert!((hs[(2, 2)] + 2.0).abs() < 1e-12);
        let t = third_tensor(&grid, &get, p).unwrap();
        assert!((t[0] - 6.0).abs() < 1e-9);
        assert!((t[1] - 4.0).abs() < 1e-9);
        assert!((t[3] - 4.0).abs() < 1e-9);
        assert!((t[5] - 1.0).abs() < 1e-9);
        assert!((t[2 * 9 + 3] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn missing_neighbours_give_none() {
        let (grid, u) = cubic_grid();
        let get = dense(&u);
        let edge = grid.flat_index(&[0, 4, 4]);
        assert!(first(&grid, &get, edge, 0).is_none());
        assert!(first(&grid, &get, edge, 1).is_some());
        let near = grid.flat_index(&[1, 4, 4]);
        assert!(third(&grid, &get, near, 0, 0, 0).is_none());
        assert!(third(&grid, &get, near, 0, 0, 1).is_some());
    }
}
