use serde::{Deserialize, Serialize};

/// Positions of `k` points in `d`-dimensional space, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    dimension: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dimension: usize, coords: Vec<f64>) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        assert_eq!(coords.len() % dimension, 0, "ragged coordinate list");
        Self { dimension, coords }
    }

    pub fn from_1d(xs: &[f64]) -> Self {
        Self::new(1, xs.to_vec())
    }

    pub fn from_points(points: &[Vec<f64>]) -> Self {
        let dimension = points.first().map_or(1, Vec::len);
        Self::new(dimension, points.concat())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.point(i), self.point(j))
    }

    /// Shifts every point so that point 0 sits at the origin.
    pub fn rooted(&self) -> Self {
        let origin = self.point(0).to_vec();
        let mut out = self.clone();
        for i in 0..out.len() {
            for (x, o) in out.point_mut(i).iter_mut().zip(&origin) {
                *x -= o;
            }
        }
        out
    }

    /// True if the graph with edges `|x_i - x_j| <= range` is connected.
    pub fn is_range_connected(&self, range: f64) -> bool {
        let k = self.len();
        if k <= 1 {
            return true;
        }
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..k {
                if !seen[j] && self.distance(i, j) <= range {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == k
    }
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() == 1 {
        return (a[0] - b[0]).abs();
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
