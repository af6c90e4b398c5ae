/// Uniform bucket grid over `[0, side]²` for nearest-point queries.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    cols: usize,
    buckets: Vec<Vec<u32>>,
    points: Vec<[f64; 2]>,
}

impl GridIndex {
    /// Roughly one point per bucket.
    pub fn new(points: &[[f64; 2]], side: f64) -> Self {
        let n = points.len().max(1);
        let cols = ((n as f64).sqrt().ceil() as usize).clamp(1, 4096);
        let cell = side / cols as f64;
        let mut buckets = vec![Vec::new(); cols * cols];
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = Self::bucket_of(p, cell, cols);
            buckets[cy * cols + cx].push(i as u32);
        }
        Self {
            cell,
            cols,
            buckets,
            points: points.to_vec(),
        }
    }

    fn bucket_of(p: &[f64; 2], cell: f64, cols: usize) -> (usize, usize) {
        let clamp = |v: f64| ((v / cell).floor().max(0.0) as usize).min(cols - 1);
        (clamp(p[0]), clamp(p[1]))
    }

    /// Index and squared distance of the nearest point, or `None` if empty.
    /// Ties go to the lower index.
    pub fn nearest(&self, q: [f64; 2]) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (cx, cy) = Self::bucket_of(&q, self.cell, self.cols);
        let mut best: Option<(usize, f64)> = None;
        let cols = self.cols as isize;
        for ring in 0..=self.cols as isize {
            // every point outside the rings searched so far is farther than this
            if let Some((_, d2)) = best {
                let reach = (ring - 1) as f64 * self.cell;
                if ring > 0 && reach > 0.0 && reach * reach > d2 {
                    break;
                }
            }
            let (x0, y0) = (cx as isize - ring, cy as isize - ring);
            let (x1, y1) = (cx as isize + ring, cy as isize + ring);
            for by in y0.max(0)..=y1.min(cols - 1) {
                for bx in x0.max(0)..=x1.min(cols - 1) {
                    if ring > 0 && by != y0 && by != y1 && bx != x0 && bx != x1 {
                        continue;
                    }
                    for &i in &self.buckets[(by * cols + bx) as usize] {
                        let p = self.points[i as usize];
                        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d2 < bd || (d2 == bd && (i as usize) < bi),
                        };
                        if better {
                            best = Some((i as usize, d2));
                        }
                    }
                }
            }
        }
        best
    }
}
