use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gate and operation durations in nanoseconds. RZ is virtual (zero time,
/// no error).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    #[serde(rename = "1q_gate_ns")]
    pub gate_1q_ns: f64,
    #[serde(rename = "2q_gate_ns")]
    pub gate_2q_ns: f64,
    pub readout_ns: f64,
    pub prep_ns: f64,
}

impl Default for Durations {
    fn default() -> Self {
        Self { gate_1q_ns: 35.0, gate_2q_ns: 300.0, readout_ns: 4000.0, prep_ns: 1000.0 }
    }
}

/// Uniform device noise parameters. Times in ms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub t1_ms: f64,
    pub t2_ms: f64,
    pub err_1q: f64,
    pub err_2q: f64,
    pub err_readout: f64,
    pub err_spam: f64,
    #[serde(default)]
    pub durations: Durations,
}

impl NoiseSpec {
    /// Synthetic device with `T1 = T2 = t_ms` and every error class at `eps`.
    pub fn johor(t_ms: f64, eps: f64) -> Self {
        Self {
            t1_ms: t_ms,
            t2_ms: t_ms,
            err_1q: eps,
            err_2q: eps,
            err_readout: eps,
            err_spam: eps,
            durations: Durations::default(),
        }
    }

    /// Device-mean figures of the 16-qubit Falcon-class reference device.
    pub fn guadalupe_mean() -> Self {
        Self {
            t1_ms: 0.070,
            t2_ms: 0.088,
            err_1q: 3.03e-2,
            err_2q: 1.08e-2,
            err_readout: 1.98e-2,
            err_spam: 1.98e-2,
            durations: Durations::default(),
        }
    }

    /// Noise-free device with effectively infinite coherence.
    pub fn ideal() -> Self {
        Self::johor(1e9, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("t1_ms", self.t1_ms), ("t2_ms", self.t2_ms)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Noise(format!("{name} must be positive and finite")));
            }
        }
        if self.t2_ms > 2.0 * self.t1_ms * (1.0 + 1e-12) {
            return Err(Error::Noise(format!(
                "T2 = {} ms exceeds 2·T1 = {} ms",
                self.t2_ms,
                2.0 * self.t1_ms
            )));
        }
        for (name, p) in [
            ("err_1q", self.err_1q),
            ("err_2q", self.err_2q),
            ("err_readout", self.err_readout),
            ("err_spam", self.err_spam),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Noise(format!("{name} = {p} is not a probability")));
            }
        }
        let d = &self.durations;
        for t in [d.gate_1q_ns, d.gate_2q_ns, d.readout_ns, d.prep_ns] {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::Noise("durations must be finite and non-negative".into()));
            }
        }
        Ok(())
    }

    /// Amplitude-damping probability over `t_ns`.
    pub fn damping_prob(&self, t_ns: f64) -> f64 {
        -(-t_ns * 1e-6 / self.t1_ms).exp_m1()
    }

    /// Phase-flip probability over `t_ns` supplying the dephasing beyond
    /// what amplitude damping already causes.
    pub fn dephasing_prob(&self, t_ns: f64) -> f64 {
        let rate = (1.0 / self.t2_ms - 0.5 / self.t1_ms).max(0.0);
        -0.5 * (-t_ns * 1e-6 * rate).exp_m1()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Where expectation values come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    /// Exact expectation from the state vector.
    Statevector,
    Noisy(NoiseSpec),
}

impl Backend {
    pub fn label(&self) -> String {
        match self {
            Backend::Statevector => "statevector".into(),
            Backend::Noisy(s) if *s == NoiseSpec::guadalupe_mean() => "guadalupe-mean".into(),
            Backend::Noisy(s) => format!("johor:T={},eps={}", s.t1_ms, s.err_2q),
        }
    }
}

/// `guadalupe-mean` or `johor:T=<ms>,eps=<p>`.
pub fn make_backend(label: &str) -> Result<NoiseSpec> {
    let label = label.trim();
    if label == "guadalupe-mean" {
        return Ok(NoiseSpec::guadalupe_mean());
    }
    let rest = label
        .strip_prefix("johor:")
        .or_else(|| label.strip_prefix("johor(").and_then(|r| r.strip_suffix(')')))
        .ok_or_else(|| Error::UnknownBackend(label.into()))?;
    let mut t = None;
    let mut eps = None;
    for kv in rest.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::UnknownBackend(label.into()))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::UnknownBackend(label.into()))?;
        match k.trim() {
            "T" | "t" | "t_ms" => t = Some(v),
            "eps" | "e" => eps = Some(v),
            _ => return Err(Error::UnknownBackend(label.into())),
        }
    }
    match (t, eps) {
        (Some(t), Some(e)) => {
            let s = NoiseSpec::johor(t, e);
            s.validate()?;
            Ok(s)
        }
        _ => Err(Error::UnknownBackend(label.into())),
    }
}

/// `statevector` or any label accepted by [`make_backend`].
pub fn parse_backend(label: &str) -> Result<Backend> {
    if label.trim() == "statevector" {
        Ok(Backend::Statevector)
    } else {
        make_backend(label).map(Backend::Noisy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn johor_fields() {
        let s = make_backend("johor:T=5,eps=1e-4").unwrap();
        assert_eq!(s.t1_ms, 5.0);
        assert_eq!(s.t2_ms, 5.0);
        for e in [s.err_1q, s.err_2q, s.err_readout, s.err_spam] {
            assert_eq!(e, 1e-4);
        }
        assert!(make_backend("johor(5, eps=1e-4)").is_err());
        assert_eq!(make_backend("johor(T=5,eps=1e-4)").unwrap(), s);
    }

    #[test]
    fn guadalupe_fields() {
        let s = make_backend("guadalupe-mean").unwrap();
        assert_eq!((s.t1_ms, s.t2_ms), (0.070, 0.088));
        assert_eq!(s.err_2q, 1.08e-2);
        assert_eq!(s.err_readout, 1.98e-2);
        assert_eq!(s.err_spam, 1.98e-2);
        s.validate().unwrap();
    }

    #[test]
    fn unknown_labels() {
        assert!(matches!(make_backend("fake-johor"), Err(Error::UnknownBackend(_))));
        assert!(matches!(parse_backend("johor:T=5"), Err(Error::UnknownBackend(_))));
        assert_eq!(parse_backend("statevector").unwrap(), Backend::Statevector);
    }

    #[test]
    fn physicality() {
        let mut s = NoiseSpec::johor(1.0, 0.0);
        s.t2_ms = 2.5;
        assert!(s.validate().is_err());
        let mut s = NoiseSpec::johor(1.0, 0.0);
        s.err_readout = 1.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn relaxation_probabilities() {
        let s = NoiseSpec::johor(1.0, 0.0);
        // 1 µs against T1 = 1 ms
        assert!((s.damping_prob(1000.0) - (1.0 - (-1e-3f64).exp())).abs() < 1e-15);
        // T1 = T2: 1/Tφ = 1/(2T)
        assert!((s.dephasing_prob(1000.0) - 0.5 * (1.0 - (-5e-4f64).exp())).abs() < 1e-15);
        let mut s2 = s;
        s2.t2_ms = 2.0;
        assert_eq!(s2.dephasing_prob(1000.0), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let s = NoiseSpec::johor(0.5, 1e-3);
        let text = s.to_json().unwrap();
        assert!(text.contains("\"1q_gate_ns\""));
        assert_eq!(NoiseSpec::from_json(&text).unwrap(), s);
    }
}
