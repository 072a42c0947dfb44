//! Scenario documents: JSON in, [`ScenarioSpec`] out, and back.
//!
//! Parsing walks the whole document and reports every problem it finds
//! rather than stopping at the first one.

use serde_json::{json, Map, Value};

use idobs_core::observer::{ObserverSpec, VariantTag};
use idobs_core::ode::{Method, StepScheme};
use idobs_core::scenario::{PidGains, PlantState, ScenarioSpec, ScenarioTag};
use idobs_core::signals::{NoiseSpec, SignalSpec};

pub const SCHEMA_VERSION: u64 = 1;

/// Collects errors under a dotted path while reading one JSON object.
struct Reader<'a> {
    path: String,
    obj: Option<&'a Map<String, Value>>,
    errors: &'a mut Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(path: &str, value: Option<&'a Value>, errors: &'a mut Vec<String>) -> Self {
        let obj = match value {
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                errors.push(format!("{path}: expected an object"));
                None
            }
            None => None,
        };
        Reader { path: path.to_string(), obj, errors }
    }

    fn at(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn present(&self) -> bool {
        self.obj.is_some()
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.obj.and_then(|m| m.get(key)).filter(|v| !v.is_null())
    }

    fn missing(&mut self, key: &str) {
        if self.obj.is_some() {
            let p = self.at(key);
            self.errors.push(format!("{p}: missing"));
        }
    }

    fn reject_unknown(&mut self, known: &[&str]) {
        if let Some(m) = self.obj {
            for k in m.keys() {
                if !known.contains(&k.as_str()) {
                    let p = self.at(k);
                    self.errors.push(format!("{p}: unknown field"));
                }
            }
        }
    }

    fn opt_f64(&mut self, key: &str) -> Option<f64> {
        let v = self.get(key)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                let p = self.at(key);
                self.errors.push(format!("{p}: expected a number, got {v}"));
                None
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        self.opt_f64(key).unwrap_or(default)
    }

    fn req_f64(&mut self, key: &str) -> Option<f64> {
        if self.get(key).is_none() {
            self.missing(key);
            return None;
        }
        self.opt_f64(key)
    }

    fn opt_u64(&mut self, key: &str) -> Option<u64> {
        let v = self.get(key)?;
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                let p = self.at(key);
                self.errors.push(format!("{p}: expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn req_u64(&mut self, key: &str) -> Option<u64> {
        if self.get(key).is_none() {
            self.missing(key);
            return None;
        }
        self.opt_u64(key)
    }

    fn opt_str(&mut self, key: &str) -> Option<&'a str> {
        let v = self.get(key)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                let p = self.at(key);
                self.errors.push(format!("{p}: expected a string, got {v}"));
                None
            }
        }
    }

    fn opt_f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.get(key)?;
        let p = self.at(key);
        let Some(items) = v.as_array() else {
            self.errors.push(format!("{p}: expected a list of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match item.as_f64() {
                Some(x) => out.push(x),
                None => {
                    self.errors.push(format!("{p}[{i}]: expected a number, got {item}"));
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn req_f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        if self.get(key).is_none() {
            self.missing(key);
            return None;
        }
        self.opt_f64_list(key)
    }

    fn child(&mut self, key: &str) -> Reader<'_> {
        let path = self.at(key);
        let value = self.get(key);
        Reader::new(&path, value, self.errors)
    }

    fn error(&mut self, key: &str, msg: &str) {
        let p = self.at(key);
        self.errors.push(format!("{p}: {msg}"));
    }
}

/// Every parse error of a document, plus the scenario issues when parsing
/// itself succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Parses a document without validating the scenario semantics.
pub fn parse(text: &str) -> Result<ScenarioSpec, ConfigErrors> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigErrors(vec![format!("malformed JSON: {e}")]))?;
    let mut errors = Vec::new();
    let spec = read_root(&root, &mut errors);
    match spec {
        Some(s) if errors.is_empty() => Ok(s),
        _ => Err(ConfigErrors(errors)),
    }
}

/// Parses and validates; all problems are reported together.
pub fn load(text: &str) -> Result<ScenarioSpec, ConfigErrors> {
    let spec = parse(text)?;
    let issues = spec.issues();
    if issues.is_empty() {
        Ok(spec)
    } else {
        Err(ConfigErrors(issues.iter().map(|i| i.to_string()).collect()))
    }
}

fn read_root(root: &Value, errors: &mut Vec<String>) -> Option<ScenarioSpec> {
    let mut r = Reader::new("", Some(root), errors);
    if !r.present() {
        return None;
    }
    r.reject_unknown(&["schema_version", "scenario", "observer", "signal", "noise", "scheme"]);
    match r.req_u64("schema_version") {
        Some(SCHEMA_VERSION) | None => {}
        Some(v) => r.error("schema_version", &format!("unsupported version {v}, expected {SCHEMA_VERSION}")),
    }
    for key in ["scenario", "observer", "signal"] {
        if r.get(key).is_none() {
            r.missing(key);
        }
    }

    let scenario = read_scenario(&mut r.child("scenario"));
    let observer = read_observer(&mut r.child("observer"));
    let signal = r.get("signal").and_then(|v| read_signal("signal", v, r.errors));
    let noise = {
        let mut c = r.child("noise");
        if c.present() {
            Some(read_noise(&mut c))
        } else {
            None
        }
    };
    let scheme = {
        let mut c = r.child("scheme");
        read_scheme(&mut c)
    };

    let (tag, horizon, settle_time, pid, plant_initial, sweep) = scenario?;
    Some(ScenarioSpec {
        tag,
        observer: observer?,
        signal: signal?,
        noise: match noise {
            Some(n) => Some(n?),
            None => None,
        },
        scheme: scheme?,
        horizon,
        settle_time,
        pid,
        plant_initial,
        sweep,
    })
}

type ScenarioFields = (ScenarioTag, f64, f64, Option<PidGains>, Option<PlantState>, Vec<f64>);

fn read_scenario(r: &mut Reader<'_>) -> Option<ScenarioFields> {
    if !r.present() {
        return None;
    }
    r.reject_unknown(&["tag", "horizon", "settle_time", "pid", "plant_initial", "sweep"]);
    let tag = match r.opt_str("tag") {
        Some(s) => ScenarioTag::parse(s).or_else(|| {
            let names: Vec<&str> = ScenarioTag::ALL.iter().map(|t| t.name()).collect();
            r.error("tag", &format!("unknown tag {s:?}, expected one of {}", names.join(", ")));
            None
        }),
        None => {
            r.missing("tag");
            None
        }
    };
    let horizon = r.req_f64("horizon");
    let default_settle = if tag == Some(ScenarioTag::PidClosedLoop) { 30.0 } else { 20.0 };
    let settle = r.f64_or("settle_time", default_settle);

    let pid = {
        let mut c = r.child("pid");
        if c.present() {
            c.reject_unknown(&["kp", "ki", "kd"]);
            match (c.req_f64("kp"), c.req_f64("ki"), c.req_f64("kd")) {
                (Some(kp), Some(ki), Some(kd)) => Some(PidGains { kp, ki, kd }),
                _ => None,
            }
        } else {
            None
        }
    };
    let plant = {
        let mut c = r.child("plant_initial");
        if c.present() {
            c.reject_unknown(&["z1", "z2"]);
            match (c.req_f64("z1"), c.req_f64("z2")) {
                (Some(z1), Some(z2)) => Some(PlantState { z1, z2 }),
                _ => None,
            }
        } else {
            None
        }
    };
    let sweep = r.opt_f64_list("sweep").unwrap_or_default();
    Some((tag?, horizon?, settle, pid, plant, sweep))
}

fn read_observer(r: &mut Reader<'_>) -> Option<ObserverSpec> {
    if !r.present() {
        return None;
    }
    r.reject_unknown(&["n", "p", "gains", "epsilon", "alpha_n", "initial_state", "variant"]);
    let variant = match r.opt_str("variant") {
        Some(s) => match VariantTag::parse(s) {
            Some(v) => Some(Some(v)),
            None => {
                let names: Vec<&str> = VariantTag::ALL.iter().map(|t| t.name()).collect();
                r.error("variant", &format!("unknown variant {s:?}, expected one of {}", names.join(", ")));
                None
            }
        },
        None => Some(None),
    };
    // n and p may be implied by the variant
    let shape = variant.flatten().map(VariantTag::shape);
    let n = match shape {
        Some((n, _)) if r.get("n").is_none() => Some(n as u64),
        _ => r.req_u64("n"),
    };
    let p = match shape {
        Some((_, p)) if r.get("p").is_none() => Some(p as u64),
        _ => r.req_u64("p"),
    };
    let gains = r.req_f64_list("gains");
    let epsilon = r.req_f64("epsilon");
    let alpha_n = r.req_f64("alpha_n");
    let initial_state = match r.opt_f64_list("initial_state") {
        Some(v) => Some(v),
        None if r.get("initial_state").is_none() => n.map(|n| vec![0.0; n as usize]),
        None => None,
    };
    Some(ObserverSpec {
        n: n? as usize,
        p: p? as usize,
        gains: gains?,
        epsilon: epsilon?,
        alpha_n: alpha_n?,
        initial_state: initial_state?,
        variant: variant?,
    })
}

fn read_signal(path: &str, value: &Value, errors: &mut Vec<String>) -> Option<SignalSpec> {
    let mut r = Reader::new(path, Some(value), errors);
    if !r.present() {
        return None;
    }
    let kind = r.opt_str("kind");
    match kind {
        Some("cosine") => {
            r.reject_unknown(&["kind", "omega", "amplitude"]);
            let omega = r.f64_or("omega", 1.0);
            let amplitude = r.f64_or("amplitude", 1.0);
            Some(SignalSpec::Cosine { omega, amplitude })
        }
        Some("constant") => {
            r.reject_unknown(&["kind", "value"]);
            r.req_f64("value").map(SignalSpec::Constant)
        }
        Some("polynomial") => {
            r.reject_unknown(&["kind", "coefficients"]);
            r.req_f64_list("coefficients").map(SignalSpec::Polynomial)
        }
        Some("sum") => {
            r.reject_unknown(&["kind", "terms"]);
            let Some(terms) = r.get("terms") else {
                r.missing("terms");
                return None;
            };
            let Some(items) = terms.as_array() else {
                r.error("terms", "expected a list of signals");
                return None;
            };
            let base = r.at("terms");
            let parts: Vec<Option<SignalSpec>> =
                items.iter().enumerate().map(|(i, v)| read_signal(&format!("{base}[{i}]"), v, r.errors)).collect();
            parts.into_iter().collect::<Option<Vec<_>>>().map(SignalSpec::Sum)
        }
        Some(other) => {
            r.error("kind", &format!("unknown signal kind {other:?}, expected cosine, constant, polynomial or sum"));
            None
        }
        None => {
            r.missing("kind");
            None
        }
    }
}

fn read_noise(r: &mut Reader<'_>) -> Option<NoiseSpec> {
    r.reject_unknown(&[
        "gaussian_variance",
        "gaussian_mean",
        "pulse_amplitude",
        "pulse_period",
        "pulse_width_fraction",
        "pulse_phase",
        "sample_rate",
        "seed",
    ]);
    let d = NoiseSpec::pulsed_gaussian(0);
    let seed = match r.get("seed") {
        Some(_) => r.opt_u64("seed")?,
        None => {
            r.missing("seed");
            return None;
        }
    };
    Some(NoiseSpec {
        gaussian_variance: r.f64_or("gaussian_variance", d.gaussian_variance),
        gaussian_mean: r.f64_or("gaussian_mean", d.gaussian_mean),
        pulse_amplitude: r.f64_or("pulse_amplitude", d.pulse_amplitude),
        pulse_period: r.f64_or("pulse_period", d.pulse_period),
        pulse_width_fraction: r.f64_or("pulse_width_fraction", d.pulse_width_fraction),
        pulse_phase: r.f64_or("pulse_phase", d.pulse_phase),
        sample_rate: r.f64_or("sample_rate", d.sample_rate),
        seed,
    })
}

fn read_scheme(r: &mut Reader<'_>) -> Option<StepScheme> {
    let mut scheme = StepScheme::default();
    if !r.present() {
        return Some(scheme);
    }
    r.reject_unknown(&["method", "dt"]);
    if let Some(m) = r.opt_str("method") {
        match Method::parse(m) {
            Some(m) => scheme.method = m,
            None => {
                r.error("method", &format!("unknown method {m:?}, expected RK4 or Euler"));
                return None;
            }
        }
    }
    scheme.dt = r.f64_or("dt", scheme.dt);
    Some(scheme)
}

fn signal_json(s: &SignalSpec) -> Value {
    match s {
        SignalSpec::Cosine { omega, amplitude } => json!({"kind": "cosine", "omega": omega, "amplitude": amplitude}),
        SignalSpec::Constant(c) => json!({"kind": "constant", "value": c}),
        SignalSpec::Polynomial(c) => json!({"kind": "polynomial", "coefficients": c}),
        SignalSpec::Sum(parts) => json!({"kind": "sum", "terms": parts.iter().map(signal_json).collect::<Vec<_>>()}),
    }
}

/// Canonical document for `spec`, with every default spelled out.
pub fn to_json(spec: &ScenarioSpec) -> Value {
    let o = &spec.observer;
    let mut scenario = json!({
        "tag": spec.tag.name(),
        "horizon": spec.horizon,
        "settle_time": spec.settle_time,
    });
    let sm = scenario.as_object_mut().expect("object literal");
    if let Some(g) = spec.pid {
        sm.insert("pid".into(), json!({"kp": g.kp, "ki": g.ki, "kd": g.kd}));
    }
    if let Some(z) = spec.plant_initial {
        sm.insert("plant_initial".into(), json!({"z1": z.z1, "z2": z.z2}));
    }
    if !spec.sweep.is_empty() {
        sm.insert("sweep".into(), json!(spec.sweep));
    }
    let mut observer = json!({
        "n": o.n,
        "p": o.p,
        "gains": o.gains,
        "epsilon": o.epsilon,
        "alpha_n": o.alpha_n,
        "initial_state": o.initial_state,
    });
    if let Some(v) = o.variant {
        observer.as_object_mut().expect("object literal").insert("variant".into(), json!(v.name()));
    }
    let noise = match &spec.noise {
        Some(n) => json!({
            "gaussian_variance": n.gaussian_variance,
            "gaussian_mean": n.gaussian_mean,
            "pulse_amplitude": n.pulse_amplitude,
            "pulse_period": n.pulse_period,
            "pulse_width_fraction": n.pulse_width_fraction,
            "pulse_phase": n.pulse_phase,
            "sample_rate": n.sample_rate,
            "seed": n.seed,
        }),
        None => Value::Null,
    };
    json!({
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "observer": observer,
        "signal": signal_json(&spec.signal),
        "noise": noise,
        "scheme": {"method": spec.scheme.method.name(), "dt": spec.scheme.dt},
    })
}
