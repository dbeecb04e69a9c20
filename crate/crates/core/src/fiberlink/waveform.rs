use num_complex::Complex64;

/// Two equal-length complex sample streams, one per polarization, with
/// |E|^2 in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPolWaveform {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl DualPolWaveform {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate_hz: f64) -> Self {
        assert_eq!(x.len(), y.len(), "polarization lengths differ");
        Self {
            x,
            y,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Mean total power over both polarizations.
    pub fn power(&self) -> f64 {
        let sum: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        sum / self.len() as f64
    }

    pub fn power_dbm(&self) -> f64 {
        watts_to_dbm(self.power())
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.x.iter_mut().chain(self.y.iter_mut()) {
            *v *= factor;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x
            .iter()
            .chain(&self.y)
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}
