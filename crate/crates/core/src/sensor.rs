//! Circular detector arrays and the time traces they record.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Real;

/// `num_sensors` point detectors spaced uniformly in angle on a circle.
/// Sensor `j` sits at angle `2πj / num_sensors`, measured from the +x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry<T = f64> {
    pub center: [T; 2],
    pub radius: T,
    pub num_sensors: usize,
}

impl<T: Real> SensorGeometry<T> {
    pub fn new(center: [T; 2], radius: T, num_sensors: usize) -> Result<Self> {
        let g = Self {
            center,
            radius,
            num_sensors,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sensors < 3 {
            return invalid(format!(
                "at least 3 sensors are required, got {}",
                self.num_sensors
            ));
        }
        if !(self.radius.is_finite() && self.radius > T::zero()) {
            return invalid(format!("sensor radius must be positive, got {}", self.radius));
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return invalid("sensor circle center must be finite");
        }
        Ok(())
    }

    pub fn angle(&self, j: usize) -> T {
        T::of(2.0) * T::PI() * T::of_usize(j) / T::of_usize(self.num_sensors)
    }

    pub fn position(&self, j: usize) -> [T; 2] {
        let a = self.angle(j);
        [
            self.center[0] + self.radius * a.cos(),
            self.center[1] + self.radius * a.sin(),
        ]
    }

    pub fn positions(&self) -> Vec<[T; 2]> {
        (0..self.num_sensors).map(|j| self.position(j)).collect()
    }

    /// Distance of `x` from the circle center.
    pub fn distance_from_center(&self, x: [T; 2]) -> T {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        (dx * dx + dy * dy).sqrt()
    }

    /// Arc length between neighbouring sensors.
    pub fn spacing(&self) -> T {
        T::of(2.0) * T::PI() * self.radius / T::of_usize(self.num_sensors)
    }

    pub fn cast<U: Real>(&self) -> SensorGeometry<U> {
        SensorGeometry {
            center: [U::of(self.center[0].f64()), U::of(self.center[1].f64())],
            radius: U::of(self.radius.f64()),
            num_sensors: self.num_sensors,
        }
    }
}

/// Time traces recorded by every sensor of a [`SensorGeometry`].
///
/// Sample `n` of a trace is taken at time `(n − time_origin)·dt`. Raw
/// measurements are causal (`time_origin == 0`). Outputs of the spectral
/// operations are `periodic`: the trace is one full period of a circular
/// signal whose negative times occupy the samples before `time_origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorData<T = f64> {
    pub geometry: SensorGeometry<T>,
    pub dt: T,
    pub num_steps: usize,
    pub time_origin: usize,
    pub periodic: bool,
    /// Sensor-major: trace `j` is `traces[j*num_steps..(j+1)*num_steps]`.
    pub traces: Vec<T>,
}

impl<T: Real> SensorData<T> {
    pub fn new(
        geometry: SensorGeometry<T>,
        dt: T,
        num_steps: usize,
        time_origin: usize,
        traces: Vec<T>,
    ) -> Result<Self> {
        let data = Self {
            geometry,
            dt,
            num_steps,
            time_origin,
            periodic: false,
            traces,
        };
        data.validate()?;
        Ok(data)
    }

    /// Causal all-zero traces.
    pub fn zeros(geometry: SensorGeometry<T>, dt: T, num_steps: usize) -> Self {
        Self {
            geometry,
            dt,
            num_steps,
            time_origin: 0,
            periodic: false,
            traces: vec![T::zero(); geometry.num_sensors * num_steps],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return invalid(format!("time step must be positive, got {}", self.dt));
        }
        if self.num_steps == 0 {
            return invalid("traces must have at least one sample");
        }
        if self.time_origin >= self.num_steps {
            return invalid("time origin lies outside the trace window");
        }
        if self.traces.len() != self.geometry.num_sensors * self.num_steps {
            return invalid(format!(
                "{} sensors x {} steps needs {} values, got {}",
                self.geometry.num_sensors,
                self.num_steps,
                self.geometry.num_sensors * self.num_steps,
                self.traces.len()
            ));
        }
        if let Some(k) = self.traces.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite trace value at index {k}"));
        }
        Ok(())
    }

    #[inline]
    pub fn num_sensors(&self) -> usize {
        self.geometry.num_sensors
    }

    pub fn is_causal(&self) -> bool {
        self.time_origin == 0 && !self.periodic
    }

    #[inline]
    pub fn trace(&self, j: usize) -> &[T] {
        &self.traces[j * self.num_steps..(j + 1) * self.num_steps]
    }

    #[inline]
    pub fn trace_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.traces[j * self.num_steps..(j + 1) * self.num_steps]
    }

    /// Time of sample `n`.
    pub fn time(&self, n: usize) -> T {
        (T::of_usize(n) - T::of_usize(self.time_origin)) * self.dt
    }

    /// Last sample time.
    pub fn end_time(&self) -> T {
        self.time(self.num_steps - 1)
    }

    pub fn max_abs(&self) -> T {
        self.traces
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// Causal restriction to samples with `0 ≤ t ≤ t_max`.
    pub fn causal_part(&self, t_max: T) -> Self {
        let available = self.num_steps - self.time_origin;
        let wanted = (t_max / self.dt + T::of(1e-9)).floor().to_usize().unwrap_or(0) + 1;
        let n = wanted.min(available).max(1);
        let mut traces = Vec::with_capacity(n * self.num_sensors());
        for j in 0..self.num_sensors() {
            traces.extend_from_slice(&self.trace(j)[self.time_origin..self.time_origin + n]);
        }
        Self {
            geometry: self.geometry,
            dt: self.dt,
            num_steps: n,
            time_origin: 0,
            periodic: false,
            traces,
        }
    }

    /// Same layout with every sample mapped through `f`.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            traces: self.traces.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    /// `a·self + b·other` for data sharing the same time axis.
    pub fn axpby(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.num_steps != other.num_steps
            || self.time_origin != other.time_origin
            || self.num_sensors() != other.num_sensors()
        {
            return invalid("sensor data layouts differ");
        }
        Ok(Self {
            traces: self
                .traces
                .iter()
                .zip(&other.traces)
                .map(|(x, y)| a * *x + b * *y)
                .collect(),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensors_are_uniform_on_the_circle() {
        let g = SensorGeometry::<f64>::new([1.0, -2.0], 3.0, 8).unwrap();
        for j in 0..8 {
            let p = g.position(j);
            assert!((g.distance_from_center(p) - 3.0).abs() < 1e-12);
        }
        let p2 = g.position(2);
        assert!((p2[0] - 1.0).abs() < 1e-12 && (p2[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        assert!(SensorGeometry::new([0.0, 0.0], 1.0, 2).is_err());
        assert!(SensorGeometry::new([0.0, 0.0], 0.0, 16).is_err());
    }

    #[test]
    fn causal_part_of_centered_window() {
        let g = SensorGeometry::new([0.0, 0.0], 1.0, 3).unwrap();
        let traces: Vec<f64> = (0..3).flat_map(|j| (0..9).map(move |n| (10 * j + n) as f64)).collect();
        let mut d = SensorData::new(g, 0.5, 9, 4, traces).unwrap();
        d.periodic = true;
        let c = d.causal_part(1.0);
        assert!(c.is_causal());
        assert_eq!(c.num_steps, 3);
        assert_eq!(c.trace(1), &[14.0, 15.0, 16.0]);
    }
}
