//! Run configuration: a TOML file with `[model]`, `[kernels]` and `[run]`
//! sections (JSON is accepted too), overridden by command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::integrate::{HistorySpec, SimOptions};
use crate::model::{ChainForm, Kernel, ModelParams};
use crate::roots::Region;

fn reference() -> ModelParams {
    ModelParams::reference()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "reference")]
    pub model: ModelParams,
    #[serde(default)]
    pub kernels: KernelConfig,
    #[serde(default)]
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { model: reference(), kernels: KernelConfig::default(), run: RunSection::default() }
    }
}

/// `kernel1` acts on `x`, `kernel2` on `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kernel1: Kernel,
    pub kernel2: Kernel,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { kernel1: Kernel::Dirac { tau: 0.0 }, kernel2: Kernel::Dirac { tau: 0.01 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub dt: f64,
    pub t_end: f64,
    pub history: HistorySpec,
    /// Convergence tolerance for simulation summaries.
    pub tol: f64,
    /// Write every `stride`-th sample to CSV.
    pub stride: usize,
    pub chain_form: ChainForm,
    pub zero_nonlinear: bool,
    /// Number of Dirac-Dirac crossings listed by `hopf`.
    pub branches: u32,
    /// Rectangle scanned for characteristic roots by `analyze`.
    pub scan: Region,
    /// Range searched for a weak-kernel rate matching the second printed row.
    pub q2_scan: [f64; 2],
    pub q2_scan_points: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 500.0,
            history: HistorySpec::default(),
            tol: 1e-4,
            stride: 10,
            chain_form: ChainForm::Corrected,
            zero_nonlinear: false,
            branches: 3,
            scan: Region::new(-2.0, 1.0, -0.1, 6.0),
            q2_scan: [0.01, 2.0],
            q2_scan_points: 2000,
        }
    }
}

impl RunSection {
    pub fn sim_options(&self) -> SimOptions {
        SimOptions { t_end: self.t_end, dt: self.dt }
    }
}

/// The two supported kernel pairings, with their delay parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum KernelCase {
    DiracDirac { tau1: f64, tau2: f64 },
    DiracWeak { tau1: f64, q2: f64 },
}

/// Command-line values that replace file values when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub b3: Option<f64>,
    pub b4: Option<f64>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub q2: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub delta: Option<f64>,
    pub stride: Option<usize>,
    pub as_printed: bool,
    pub zero_nonlinear: bool,
}

impl RunConfig {
    /// Reads a TOML or JSON file. JSON command output is accepted as well:
    /// its embedded `config` object is used.
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
        if is_json {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        let inner = match value.get("config") {
            Some(c) => c.clone(),
            None => value,
        };
        serde_json::from_value(inner).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        let m = &mut self.model;
        for (slot, v) in [
            (&mut m.a1, o.a1),
            (&mut m.a2, o.a2),
            (&mut m.b1, o.b1),
            (&mut m.b2, o.b2),
            (&mut m.b3, o.b3),
            (&mut m.b4, o.b4),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(tau) = o.tau1 {
            self.kernels.kernel1 = Kernel::Dirac { tau };
        }
        if let Some(tau) = o.tau2 {
            self.kernels.kernel2 = Kernel::Dirac { tau };
        }
        if let Some(q) = o.q2 {
            self.kernels.kernel2 = Kernel::weak(q);
        }
        if let Some(dt) = o.dt {
            self.run.dt = dt;
        }
        if let Some(t) = o.t_end {
            self.run.t_end = t;
        }
        if let Some(delta) = o.delta {
            self.run.history = HistorySpec::PerturbedEquilibrium { delta };
        }
        if let Some(s) = o.stride {
            self.run.stride = s;
        }
        if o.as_printed {
            self.run.chain_form = ChainForm::AsPrinted;
        }
        if o.zero_nonlinear {
            self.run.zero_nonlinear = true;
        }
    }

    /// Checks everything that can be checked before a computation starts.
    pub fn validate(&self) -> Result<KernelCase, CliError> {
        self.model.require_admissible().map_err(|e| CliError::Validation(format!("[model] {e}")))?;
        let case = self.kernel_case()?;
        let r = &self.run;
        let positive = [("dt", r.dt), ("t_end", r.t_end), ("tol", r.tol)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Validation(format!("[run] {name} must be positive, got {v}")));
            }
        }
        if r.stride == 0 {
            return Err(CliError::Validation("[run] stride must be at least 1".into()));
        }
        if r.branches == 0 {
            return Err(CliError::Validation("[run] branches must be at least 1".into()));
        }
        if r.scan.is_empty() {
            return Err(CliError::Validation("[run] scan region is empty".into()));
        }
        let [lo, hi] = r.q2_scan;
        if !(lo > 0.0 && hi > lo) || r.q2_scan_points < 2 {
            return Err(CliError::Validation("[run] q2_scan must satisfy 0 < lo < hi with at least 2 points".into()));
        }
        Ok(case)
    }

    pub fn kernel_case(&self) -> Result<KernelCase, CliError> {
        let k = &self.kernels;
        for (name, kernel) in [("kernel1", k.kernel1), ("kernel2", k.kernel2)] {
            kernel.validate().map_err(|e| CliError::Validation(format!("[kernels] {name}: {e}")))?;
        }
        let tau1 = match k.kernel1 {
            Kernel::Dirac { tau } => tau,
            Kernel::Gamma { .. } => {
                return Err(CliError::Validation("[kernels] kernel1 must be a dirac kernel".into()));
            }
        };
        match k.kernel2 {
            Kernel::Dirac { tau } => Ok(KernelCase::DiracDirac { tau1, tau2: tau }),
            Kernel::Gamma { order: 0, rate } => Ok(KernelCase::DiracWeak { tau1, q2: rate }),
            Kernel::Gamma { order, .. } => Err(CliError::Validation(format!(
                "[kernels] kernel2 gamma order {order} is not supported; use order 0"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[model]
a1 = 2.5
a2 = 1.0
b1 = 1.0
b2 = 0.4
b3 = 0.95
b4 = 2.0

[kernels]
kernel1 = { type = "dirac", tau = 1.5 }
kernel2 = { type = "gamma", order = 0, rate = 0.1 }

[run]
dt = 0.002
t_end = 50.0
history = { kind = "constant", point = [0.2, 2.4] }
"#;

    #[test]
    fn toml_sections_parse() {
        let c = RunConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.model, ModelParams::reference());
        assert_eq!(c.validate().unwrap(), KernelCase::DiracWeak { tau1: 1.5, q2: 0.1 });
        assert_eq!(c.run.dt, 0.002);
        assert_eq!(c.run.stride, 10);
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(RunConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn json_envelope_is_accepted() {
        let c = RunConfig::from_toml_str(SAMPLE).unwrap();
        let env = serde_json::json!({ "command": "analyze", "config": c });
        assert_eq!(RunConfig::from_json_str(&env.to_string()).unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml_str("[run]\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, CliError::Validation(m) if m.contains("bogus")));
    }

    #[test]
    fn overrides_win() {
        let mut c = RunConfig::from_toml_str(SAMPLE).unwrap();
        c.apply(&Overrides { tau2: Some(0.3), b3: Some(1.0), as_printed: true, ..Default::default() });
        assert_eq!(c.validate().unwrap(), KernelCase::DiracDirac { tau1: 1.5, tau2: 0.3 });
        assert_eq!(c.model.b3, 1.0);
        assert_eq!(c.run.chain_form, ChainForm::AsPrinted);
    }

    #[test]
    fn validation_names_the_problem() {
        let mut c = RunConfig::default();
        c.model.b4 = 3.0;
        let CliError::Validation(msg) = c.validate().unwrap_err() else { panic!() };
        assert!(msg.contains("b4/b3 < a1/a2"), "{msg}");
        let mut c = RunConfig::default();
        c.run.dt = 0.0;
        assert!(matches!(c.validate(), Err(CliError::Validation(m)) if m.contains("dt")));
        let mut c = RunConfig::default();
        c.kernels.kernel1 = Kernel::weak(1.0);
        assert!(matches!(c.validate(), Err(CliError::Validation(m)) if m.contains("kernel1")));
    }
}
