//! Sampled curves and their metric lengths.

use std::io::Write;

use crate::cvec::{CVec, PointC, VectorC};
use crate::domain::{DomainSpec, DELTA_FLOOR};
use crate::error::{Error, Result};
use crate::numeric::rel_diff;

/// A curve known at ordered sample times. Segments listed in `jumps` (by
/// their starting index) are not traversed: the curve may be discontinuous.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    pub times: Vec<f64>,
    pub points: Vec<PointC>,
    pub jumps: Vec<usize>,
}

impl SampledCurve {
    pub fn new(times: Vec<f64>, points: Vec<PointC>) -> Result<Self> {
        if times.len() != points.len() || times.is_empty() {
            return Err(Error::Degenerate("curve needs equally many (>= 1) times and points".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Degenerate("curve times must be strictly increasing".into()));
        }
        Ok(SampledCurve {
            times,
            points,
            jumps: Vec::new(),
        })
    }

    pub fn with_jumps(mut self, jumps: Vec<usize>) -> Result<Self> {
        if jumps.iter().any(|&j| j + 1 >= self.len()) {
            return Err(Error::Degenerate("jump index out of range".into()));
        }
        self.jumps = jumps;
        Ok(self)
    }

    fn traversed(&self, i: usize) -> bool {
        !self.jumps.contains(&i)
    }

    pub fn single(p: PointC) -> Self {
        SampledCurve {
            times: vec![0.0],
            points: vec![p],
            jumps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> &PointC {
        &self.points[0]
    }

    pub fn last(&self) -> &PointC {
        self.points.last().unwrap()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.points
            .windows(2)
            .enumerate()
            .filter(|(i, _)| self.traversed(*i))
            .map(|(_, w)| w[0].dist(&w[1]))
            .sum()
    }

    /// Fails unless every sample is interior with δ above the floor.
    pub fn check_interior(&self, domain: &DomainSpec) -> Result<()> {
        for p in &self.points {
            let f = crate::domain::boundary_frame(domain, p)?;
            if f.signed_delta >= 0.0 {
                return Err(Error::Geometry(format!("curve point {p:.6} is not interior")));
            }
            if f.delta < DELTA_FLOOR {
                return Err(Error::DeltaFloor {
                    delta: f.delta,
                    floor: DELTA_FLOOR,
                });
            }
        }
        Ok(())
    }

    /// `∫ metric(γ; γ')` over the polyline through the samples. Each segment is
    /// integrated with a composite trapezoid rule whose resolution doubles
    /// until successive Richardson estimates agree to `rtol`.
    pub fn length_with<F>(&self, metric: F, rtol: f64) -> Result<f64>
    where
        F: Fn(&PointC, &VectorC) -> Result<f64>,
    {
        Ok(self.segment_lengths(metric, rtol)?.iter().sum())
    }

    /// Metric length of every segment (zero across jumps), refined jointly.
    pub fn segment_lengths<F>(&self, metric: F, rtol: f64) -> Result<Vec<f64>>
    where
        F: Fn(&PointC, &VectorC) -> Result<f64>,
    {
        if self.len() < 2 {
            return Ok(Vec::new());
        }
        let segs: Vec<(PointC, VectorC)> = self
            .points
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let v = if self.traversed(i) { &w[1] - &w[0] } else { CVec::zeros(w[0].dim()) };
                (w[0].clone(), v)
            })
            .collect();
        // metric density at parameter s of segment i
        let eval = |i: usize, s: f64| -> Result<f64> {
            let (p, v) = &segs[i];
            metric(&(p + &(v * s)), v)
        };
        let k = segs.len();
        let mut m = 1usize;
        let mut end_sum = vec![0.0; k];
        let mut node_sum = vec![0.0; k];
        for i in 0..k {
            if self.traversed(i) {
                end_sum[i] = 0.5 * (eval(i, 0.0)? + eval(i, 1.0)?);
            }
        }
        let mut trap = end_sum.clone();
        let mut prev_total = f64::NAN;
        loop {
            let m2 = 2 * m;
            let mut rich = vec![0.0; k];
            for i in (0..k).filter(|&i| self.traversed(i)) {
                for j in (1..m2).step_by(2) {
                    node_sum[i] += eval(i, j as f64 / m2 as f64)?;
                }
                let t2 = (end_sum[i] + node_sum[i]) / m2 as f64;
                rich[i] = t2 + (t2 - trap[i]) / 3.0;
                trap[i] = t2;
            }
            let total: f64 = rich.iter().sum();
            if rel_diff(total, prev_total) < rtol || m2 >= 1024 {
                return Ok(rich);
            }
            prev_total = total;
            m = m2;
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.points[0].dim();
        let mut header = vec!["time".to_string()];
        for j in 0..n {
            header.push(format!("re{}", j + 1));
            header.push(format!("im{}", j + 1));
        }
        writeln!(out, "{}", header.join(","))?;
        for (t, p) in self.times.iter().zip(&self.points) {
            let cols: Vec<String> = std::iter::once(*t)
                .chain(p.to_reals())
                .map(|x| format!("{x:.17e}"))
                .collect();
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}
