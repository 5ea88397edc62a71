//! Zero-phase low-pass filtering and finite differencing for sampled signals.

/// Second-order Butterworth low-pass biquad, bilinear transform with
/// frequency prewarping. Coefficients normalized so that `a0 = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    /// Design a second-order Butterworth low-pass with cutoff `fc` (Hz) at
    /// sample rate `fs` (Hz). Requires `0 < fc < fs / 2`.
    pub fn butterworth_lowpass(fc: f64, fs: f64) -> Self {
        assert!(fc > 0.0 && fc < fs / 2.0, "cutoff must lie in (0, fs/2)");
        let w = (std::f64::consts::PI * fc / fs).tan();
        let sq2 = std::f64::consts::SQRT_2;
        let norm = 1.0 + sq2 * w + w * w;
        let b0 = w * w / norm;
        Biquad {
            b: [b0, 2.0 * b0, b0],
            a: [2.0 * (w * w - 1.0) / norm, (1.0 - sq2 * w + w * w) / norm],
        }
    }

    /// Largest pole magnitude; governs how fast edge transients decay.
    fn pole_radius(&self) -> f64 {
        // z^2 + a1 z + a2 = 0
        let (a1, a2) = (self.a[0], self.a[1]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc >= 0.0 {
            let r1 = (-a1 + disc.sqrt()) / 2.0;
            let r2 = (-a1 - disc.sqrt()) / 2.0;
            r1.abs().max(r2.abs())
        } else {
            a2.abs().sqrt()
        }
    }

    /// Single forward pass, direct form II transposed, with the filter state
    /// initialized so that a constant input produces no transient.
    fn filter_in_place(&self, x: &mut [f64]) {
        if x.is_empty() {
            return;
        }
        let k = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1]);
        // Steady-state DF2T registers for unit input, scaled by the first sample.
        let mut s2 = (self.b[2] - self.a[1] * k) * x[0];
        let mut s1 = (self.b[1] + self.b[2] - (self.a[0] + self.a[1]) * k) * x[0];
        for v in x.iter_mut() {
            let xn = *v;
            let y = self.b[0] * xn + s1;
            s1 = self.b[1] * xn - self.a[0] * y + s2;
            s2 = self.b[2] * xn - self.a[1] * y;
            *v = y;
        }
    }
}

/// Zero-phase (forward-backward) application of `biquad` with odd-reflection
/// padding at both ends. Constants and straight lines pass through exactly up
/// to the transient floor; the effective magnitude response is the square of
/// the single-pass response.
pub fn filtfilt(biquad: &Biquad, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return x.to_vec();
    }
    // Pad long enough that edge transients decay below ~1e-14.
    let r = biquad.pole_radius().clamp(0.05, 0.9999);
    let pad = ((-32.0 / r.ln()).ceil() as usize).clamp(8, n - 1);

    let mut ext = Vec::with_capacity(n + 2 * pad);
    for i in (1..=pad).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in (n - 1 - pad..n - 1).rev() {
        ext.push(2.0 * x[n - 1] - x[i]);
    }

    biquad.filter_in_place(&mut ext);
    ext.reverse();
    biquad.filter_in_place(&mut ext);
    ext.reverse();

    ext[pad..pad + n].to_vec()
}

/// First derivative by central differences, one-sided at the endpoints.
pub fn differentiate(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 2 && dt > 0.0);
    let mut d = vec![0.0; n];
    d[0] = (x[1] - x[0]) / dt;
    d[n - 1] = (x[n - 1] - x[n - 2]) / dt;
    for i in 1..n - 1 {
        d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_passes_exactly() {
        let bq = Biquad::butterworth_lowpass(6.0, 128.0);
        let x = vec![3.25; 40];
        for y in filtfilt(&bq, &x) {
            assert_abs_diff_eq!(y, 3.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn ramp_passes_exactly() {
        let bq = Biquad::butterworth_lowpass(6.0, 128.0);
        let x: Vec<f64> = (0..400).map(|i| 0.3 * i as f64 - 7.0).collect();
        let y = filtfilt(&bq, &x);
        for (yi, xi) in y.iter().zip(&x) {
            assert_abs_diff_eq!(yi, xi, epsilon = 1e-9);
        }
    }

    #[test]
    fn low_frequency_sine_nearly_unaffected() {
        let bq = Biquad::butterworth_lowpass(6.0, 128.0);
        let n = 1024;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 128.0).sin())
            .collect();
        let y = filtfilt(&bq, &x);
        // |H(1 Hz)|^2 for the squared 6 Hz Butterworth response: ~0.9992.
        let rms_in: f64 = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        let rms_out: f64 = (y.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        assert!((rms_out / rms_in - 1.0).abs() < 5e-3);
    }

    #[test]
    fn high_frequency_strongly_attenuated() {
        // A signal that ends mid-oscillation puts a level step into the odd
        // reflection, so the endpoints carry a decaying transient; steady-
        // state attenuation is measured past the transient zone.
        let bq = Biquad::butterworth_lowpass(6.0, 128.0);
        let n = 1024;
        let x: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 50.0 * i as f64 / 128.0).sin())
            .collect();
        let y = filtfilt(&bq, &x);
        let peak = y[200..n - 200].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(peak < 5e-4, "50 Hz leak-through {peak}");
    }

    #[test]
    fn quiet_ended_burst_is_attenuated_everywhere() {
        // With quiet ends (the shape of a stand-move-stand trial) the odd
        // extension is constant and no endpoint transient appears.
        let bq = Biquad::butterworth_lowpass(6.0, 128.0);
        let n = 1024;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                if (300..700).contains(&i) {
                    let t = (i - 300) as f64 / 128.0;
                    (2.0 * std::f64::consts::PI * 50.0 * t).sin()
                        * (std::f64::consts::PI * (i - 300) as f64 / 400.0)
                            .sin()
                            .powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        let y = filtfilt(&bq, &x);
        let edge_peak = y[..100]
            .iter()
            .chain(&y[n - 100..])
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(edge_peak < 1e-8, "edge leak {edge_peak}");
    }

    #[test]
    fn central_difference_exact_for_ramp() {
        let x: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 + 1.0).collect();
        let d = differentiate(&x, 0.5);
        for v in d {
            assert_abs_diff_eq!(v, 4.0, epsilon = 1e-12);
        }
    }
}
