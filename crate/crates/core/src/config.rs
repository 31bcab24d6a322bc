//! Scenario files.
//!
//! A config is TOML with the sections `[clock]`, `[parameters]`,
//! `[trends.<name>]`, `[effects.<name>]`, `[policy]` and any number of
//! `[[scenario]]` tables. Numeric values are written either bare or as
//! `{ value = ..., source = "paper" | "derived" | "assumed" }`. Keys left
//! out fall back to the shipped calibration and are reported as notices.
//! `config/default.toml` is the complete reference document.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::engine::SimulationClock;
use crate::error::{Error, Result};
use crate::model::{AveragePriceMode, ModelParameters};
use crate::policy::{PolicyControl, PolicyId, PriceDeltaUnit};
use crate::scenario::Scenario;

const SHIPPED: &str = include_str!("../config/default.toml");

/// Where a value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Stated in the source study.
    Paper,
    /// Computed from stated values.
    Derived,
    /// Chosen during calibration.
    Assumed,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Paper => "paper",
            Source::Derived => "derived",
            Source::Assumed => "assumed",
        }
    }
}

/// A fully resolved config document.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub clock: SimulationClock,
    pub parameters: ModelParameters,
    /// Controller settings shared by all scenarios unless overridden.
    pub control: PolicyControl,
    pub fit_price_delta_unit: PriceDeltaUnit,
    pub scenarios: Vec<Scenario>,
    /// Provenance by dotted key, for keys that carried one.
    pub provenance: BTreeMap<String, Source>,
    /// Defaults applied and other non-fatal remarks, in document order.
    pub notices: Vec<String>,
}

impl Config {
    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| {
                let known: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
                Error::Config(format!("no scenario `{name}`; known: {}", known.join(", ")))
            })
    }

    /// Replaces the step and/or end year of the config clock and every scenario clock.
    pub fn override_clock(&mut self, dt: Option<f64>, end_year: Option<f64>) -> Result<()> {
        let adjust = |c: &SimulationClock| -> Result<SimulationClock> {
            SimulationClock::new(
                c.start_year(),
                end_year.unwrap_or(c.end_year()),
                dt.unwrap_or(c.dt()),
            )
        };
        self.clock = adjust(&self.clock)?;
        for s in &mut self.scenarios {
            s.clock = adjust(&s.clock)?;
            self.parameters.validate(&s.clock)?;
        }
        self.parameters.validate(&self.clock)
    }
}

/// The calibration in `config/default.toml`.
pub fn shipped() -> &'static Config {
    static CONFIG: OnceLock<Config> = OnceLock::new();
    CONFIG.get_or_init(|| parse_document(SHIPPED, None).expect("shipped config is valid"))
}

/// The shipped document text.
pub fn shipped_text() -> &'static str {
    SHIPPED
}

/// Parses a config, filling absent keys from the shipped calibration.
pub fn parse_config(text: &str) -> Result<Config> {
    let config = parse_document(text, Some(shipped()))?;
    for notice in &config.notices {
        log::info!("{notice}");
    }
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct Annotated {
    value: Scalar,
    source: Source,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Entry {
    Annotated(Annotated),
    Bare(Scalar),
}

impl Entry {
    fn split(self) -> (Scalar, Option<Source>) {
        match self {
            Entry::Annotated(a) => (a.value, Some(a.source)),
            Entry::Bare(v) => (v, None),
        }
    }
}

type Section = BTreeMap<String, Entry>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    clock: Option<Section>,
    parameters: Option<Section>,
    trends: Option<BTreeMap<String, Section>>,
    effects: Option<BTreeMap<String, Section>>,
    policy: Option<Section>,
    #[serde(default, rename = "scenario")]
    scenarios: Vec<ScenarioSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    name: String,
    #[serde(default)]
    policy: Option<String>,
    #[serde(default)]
    clock: Option<Section>,
    #[serde(default)]
    overrides: BTreeMap<String, Entry>,
    #[serde(default)]
    policy_settings: Option<Section>,
    #[serde(default)]
    outputs: Vec<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of the first `key = ...` assignment, for error messages.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

struct Resolver<'a> {
    text: &'a str,
    fallback: Option<&'a Config>,
    provenance: BTreeMap<String, Source>,
    notices: Vec<String>,
}

impl<'a> Resolver<'a> {
    fn unknown(&self, key: &str, local: &str) -> Error {
        match key_line(self.text, local) {
            Some(line) => Error::UnknownKey(format!("{key} (line {line})")),
            None => Error::UnknownKey(key.to_string()),
        }
    }

    fn number(&mut self, key: &str, entry: Entry) -> Result<f64> {
        let (value, source) = entry.split();
        if let Some(s) = source {
            self.provenance.insert(key.to_string(), s);
        }
        match value {
            Scalar::Number(v) if v.is_finite() => Ok(v),
            Scalar::Number(v) => Err(Error::invariant(key, format!("must be finite, got {v}"))),
            Scalar::Text(t) => Err(Error::invariant(
                key,
                format!("expected a number, got \"{t}\""),
            )),
        }
    }

    fn text_value(&mut self, key: &str, entry: Entry) -> Result<String> {
        let (value, source) = entry.split();
        if let Some(s) = source {
            self.provenance.insert(key.to_string(), s);
        }
        match value {
            Scalar::Text(t) => Ok(t),
            Scalar::Number(v) => Err(Error::invariant(key, format!("expected text, got {v}"))),
        }
    }

    fn missing(&mut self, key: &str) -> Result<()> {
        match self.fallback {
            Some(_) => {
                self.notices
                    .push(format!("`{key}` not set; using the shipped default"));
                Ok(())
            }
            None => Err(Error::Config(format!("required key `{key}` is missing"))),
        }
    }

    fn clock(
        &mut self,
        prefix: &str,
        section: Option<Section>,
        base: Option<SimulationClock>,
    ) -> Result<SimulationClock> {
        let base = base.or(self.fallback.map(|f| f.clock));
        let (mut start, mut end, mut dt) = match base {
            Some(c) => (Some(c.start_year()), Some(c.end_year()), Some(c.dt())),
            None => (None, None, None),
        };
        match section {
            Some(section) => {
                for (key, entry) in section {
                    let full = format!("{prefix}.{key}");
                    let v = self.number(&full, entry)?;
                    match key.as_str() {
                        "start_year" => start = Some(v),
                        "end_year" => end = Some(v),
                        "dt" => dt = Some(v),
                        _ => return Err(self.unknown(&full, &key)),
                    }
                }
            }
            None if prefix == "clock" => self.missing("clock")?,
            None => {}
        }
        match (start, end, dt) {
            (Some(s), Some(e), Some(d)) => SimulationClock::new(s, e, d),
            _ => Err(Error::Config(format!(
                "`{prefix}` needs start_year, end_year and dt"
            ))),
        }
    }
}

fn parse_document(text: &str, fallback: Option<&Config>) -> Result<Config> {
    let doc: Document = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let mut r = Resolver {
        text,
        fallback,
        provenance: BTreeMap::new(),
        notices: Vec::new(),
    };

    let clock = r.clock("clock", doc.clock, None)?;

    let mut params = fallback.map(|f| f.parameters);
    let mut seen = BTreeSet::new();
    let mut p = params.take().unwrap_or_else(blank_parameters);

    for (key, entry) in doc.parameters.unwrap_or_default() {
        let full = format!("parameters.{key}");
        if key == "average_price_mode" {
            let mode = r.text_value(&full, entry)?;
            p.rules.average_price_mode = AveragePriceMode::parse(&mode)
                .map_err(|_| Error::invariant(&full, format!("unknown mode `{mode}`")))?;
        } else if key.contains('.') || key.starts_with("trends") || key.starts_with("effects") {
            return Err(r.unknown(&full, &key));
        } else {
            let v = r.number(&full, entry)?;
            p.set(&key, v).map_err(|e| match e {
                Error::UnknownParameter(_) => r.unknown(&full, &key),
                other => other,
            })?;
        }
        seen.insert(key);
    }
    for name in parameter_keys() {
        if !seen.contains(&name) {
            r.missing(&format!("parameters.{name}"))?;
        }
    }

    let mut trends = doc.trends.unwrap_or_default();
    for trend in ["total_generation_capacity", "electricity_consumption"] {
        let section = trends.remove(trend);
        if section.is_none() {
            r.missing(&format!("trends.{trend}"))?;
        }
        let mut fields: BTreeSet<&str> = ["intercept", "slope", "reference_year"].into();
        for (key, entry) in section.unwrap_or_default() {
            let full = format!("trends.{trend}.{key}");
            if !fields.remove(key.as_str()) {
                return Err(r.unknown(&full, &key));
            }
            let v = r.number(&full, entry)?;
            p.set(&full, v)?;
        }
        for f in fields {
            r.missing(&format!("trends.{trend}.{f}"))?;
        }
    }
    if let Some(extra) = trends.keys().next() {
        return Err(r.unknown(&format!("trends.{extra}"), extra));
    }

    let mut effects = doc.effects.unwrap_or_default();
    for effect in ["social_tolerance", "investor_trust", "om_activity"] {
        let section = effects.remove(effect);
        if section.is_none() {
            r.missing(&format!("effects.{effect}"))?;
        }
        let mut fields: BTreeSet<&str> = ["y_max", "x_50", "p"].into();
        for (key, entry) in section.unwrap_or_default() {
            let full = format!("effects.{effect}.{key}");
            if !fields.remove(key.as_str()) {
                return Err(r.unknown(&full, &key));
            }
            let v = r.number(&full, entry)?;
            p.set(&full, v)?;
        }
        for f in fields {
            r.missing(&format!("effects.{effect}.{f}"))?;
        }
    }
    if let Some(extra) = effects.keys().next() {
        return Err(r.unknown(&format!("effects.{extra}"), extra));
    }
    p.validate(&clock)?;

    let (fallback_control, fallback_unit) = match fallback {
        Some(f) => (Some(f.control), f.fit_price_delta_unit),
        None => (None, PriceDeltaUnit::default()),
    };
    let mut unit = fallback_unit;
    let control = resolve_control(
        &mut r,
        "policy",
        doc.policy,
        fallback_control,
        &mut unit,
        true,
    )?;
    control.validate()?;

    let mut scenarios = Vec::new();
    let mut names = BTreeSet::new();
    for s in doc.scenarios {
        if !names.insert(s.name.clone()) {
            return Err(Error::Config(format!(
                "duplicate scenario name `{}`",
                s.name
            )));
        }
        let prefix = format!("scenario.{}", s.name);
        let policy = match &s.policy {
            Some(id) => id.parse::<PolicyId>()?,
            None => PolicyId::Base,
        };
        let sclock = r.clock(&format!("{prefix}.clock"), s.clock, Some(clock))?;
        let mut sunit = unit;
        let mut scontrol = resolve_control(
            &mut r,
            &format!("{prefix}.policy_settings"),
            s.policy_settings,
            Some(control),
            &mut sunit,
            false,
        )?;
        scontrol.policy = policy;
        scontrol.validate().map_err(|e| Error::Scenario {
            scenario: s.name.clone(),
            source: Box::new(e),
        })?;
        let mut overrides = BTreeMap::new();
        for (key, entry) in s.overrides {
            let full = format!("{prefix}.overrides.{key}");
            let v = r.number(&full, entry)?;
            if p.get(&key).is_err() {
                return Err(r.unknown(&full, &key));
            }
            overrides.insert(key, v);
        }
        let known: BTreeSet<String> = crate::model::STOCKS
            .iter()
            .chain(crate::model::FLOWS.iter())
            .chain(crate::model::AUXILIARIES.iter())
            .map(|s| s.to_string())
            .collect();
        for out in &s.outputs {
            if !known.contains(out) {
                return Err(Error::UnknownKey(format!(
                    "{prefix}.outputs: `{out}` is not a model variable"
                )));
            }
        }
        let scenario = Scenario {
            name: s.name.clone(),
            clock: sclock,
            overrides,
            control: scontrol,
            outputs: s.outputs,
        };
        scenario.parameters(&p).map_err(|e| Error::Scenario {
            scenario: s.name,
            source: Box::new(e),
        })?;
        scenarios.push(scenario);
    }
    if scenarios.is_empty() {
        r.notices
            .push("no [[scenario]] tables; running a single base scenario".to_string());
        scenarios.push(Scenario::new(
            "base",
            clock,
            control.with_policy(PolicyId::Base),
        ));
    }

    Ok(Config {
        clock,
        parameters: p,
        control,
        fit_price_delta_unit: unit,
        scenarios,
        provenance: r.provenance,
        notices: r.notices,
    })
}

const CONTROL_KEYS: [&str; 8] = [
    "fit_price_delta",
    "fit_price_delta_unit",
    "fit_controller_gain",
    "tax_controller_gain",
    "tax_floor",
    "tax_cap",
    "shortage_smoothing_time",
    "reserve_coverage",
];

fn resolve_control(
    r: &mut Resolver,
    prefix: &str,
    section: Option<Section>,
    base: Option<PolicyControl>,
    unit: &mut PriceDeltaUnit,
    report_missing: bool,
) -> Result<PolicyControl> {
    let mut c = base.unwrap_or(PolicyControl {
        policy: PolicyId::Base,
        fit_price_delta: f64::NAN,
        fit_controller_gain: f64::NAN,
        tax_controller_gain: f64::NAN,
        tax_floor: f64::NAN,
        tax_cap: f64::NAN,
        shortage_smoothing_time: f64::NAN,
        reserve_coverage: f64::NAN,
    });
    let mut delta_raw = None;
    let mut seen = BTreeSet::new();
    let section_present = section.is_some();
    for (key, entry) in section.unwrap_or_default() {
        let full = format!("{prefix}.{key}");
        if key == "fit_price_delta_unit" {
            let u = r.text_value(&full, entry)?;
            *unit = PriceDeltaUnit::parse(&u)?;
        } else {
            let v = r.number(&full, entry)?;
            match key.as_str() {
                "fit_price_delta" => delta_raw = Some(v),
                "fit_controller_gain" => c.fit_controller_gain = v,
                "tax_controller_gain" => c.tax_controller_gain = v,
                "tax_floor" => c.tax_floor = v,
                "tax_cap" => c.tax_cap = v,
                "shortage_smoothing_time" => c.shortage_smoothing_time = v,
                "reserve_coverage" => c.reserve_coverage = v,
                _ => return Err(r.unknown(&full, &key)),
            }
        }
        seen.insert(key);
    }
    if let Some(d) = delta_raw {
        c.fit_price_delta = unit.to_model(d);
    } else if seen.contains("fit_price_delta_unit") && base.is_some() {
        return Err(Error::invariant(
            format!("{prefix}.fit_price_delta_unit"),
            "changing the unit requires restating fit_price_delta",
        ));
    }
    if report_missing {
        if !section_present {
            r.missing(prefix)?;
        } else {
            for key in CONTROL_KEYS {
                if !seen.contains(key) {
                    r.missing(&format!("{prefix}.{key}"))?;
                }
            }
        }
    }
    Ok(c)
}

/// Numeric and text keys of the `[parameters]` section.
fn parameter_keys() -> Vec<String> {
    let mut keys: Vec<String> = ModelParameters::parameter_names()
        .into_iter()
        .filter(|n| !n.contains('.'))
        .collect();
    keys.push("average_price_mode".to_string());
    keys
}

fn blank_parameters() -> ModelParameters {
    use crate::engine::{LinearTrend, SigmoidEffect};
    use crate::model::*;
    let effect = SigmoidEffect::new(1.0, 1.0, 1.0).expect("valid");
    let trend = LinearTrend::new(f64::NAN, f64::NAN, f64::NAN);
    ModelParameters {
        economics: EconomicParameters {
            capacity_factor: f64::NAN,
            initial_fit_price: f64::NAN,
            om_cost: f64::NAN,
            interest_rate: f64::NAN,
            remuneration_period: f64::NAN,
            initial_capital_cost: f64::NAN,
            learning_exponent: f64::NAN,
            time_to_build: f64::NAN,
            normal_equipment_lifetime: f64::NAN,
            rejection_fraction: f64::NAN,
            capacity_target: f64::NAN,
            res_tax_base: f64::NAN,
            initial_annual_requests: f64::NAN,
        },
        initial: InitialConditions {
            installed_capacity: f64::NAN,
            depreciated_capacity: f64::NAN,
            suna_debt: f64::NAN,
            budget: f64::NAN,
        },
        rules: DecisionRules {
            price_floor_multiplier: f64::NAN,
            penetration_acceptance_gain: f64::NAN,
            min_effective_lifetime: f64::NAN,
            delay_guard: f64::NAN,
            request_lag: f64::NAN,
            average_price_mode: AveragePriceMode::default(),
        },
        effects: SocialEffectSet {
            social_tolerance: effect,
            investor_trust: effect,
            om_activity: effect,
        },
        exogenous: ExogenousInputs {
            total_generation_capacity: trend,
            electricity_consumption: trend,
        },
    }
}

fn fmt_number(v: f64) -> String {
    // `{:?}` is the shortest representation that reads back to the same f64.
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn entry(config: &Config, key: &str, value: &str) -> String {
    match config.provenance.get(key) {
        Some(s) => format!("{{ value = {value}, source = \"{}\" }}", s.as_str()),
        None => value.to_string(),
    }
}

fn write_control(
    out: &mut String,
    config: &Config,
    prefix: &str,
    c: &PolicyControl,
    unit: PriceDeltaUnit,
) {
    let delta = match unit {
        PriceDeltaUnit::UsdPerKwh => c.fit_price_delta,
        PriceDeltaUnit::UsdPerMwh => c.fit_price_delta * 1000.0,
    };
    let rows = [
        ("fit_price_delta", fmt_number(delta)),
        ("fit_price_delta_unit", format!("\"{}\"", unit.as_str())),
        ("fit_controller_gain", fmt_number(c.fit_controller_gain)),
        ("tax_controller_gain", fmt_number(c.tax_controller_gain)),
        ("tax_floor", fmt_number(c.tax_floor)),
        ("tax_cap", fmt_number(c.tax_cap)),
        (
            "shortage_smoothing_time",
            fmt_number(c.shortage_smoothing_time),
        ),
        ("reserve_coverage", fmt_number(c.reserve_coverage)),
    ];
    for (key, value) in rows {
        let _ = writeln!(
            out,
            "{key} = {}",
            entry(config, &format!("{prefix}.{key}"), &value)
        );
    }
}

/// Writes a complete document that parses back to an equivalent config.
pub fn to_toml(config: &Config) -> String {
    let mut out = String::new();
    let p = &config.parameters;
    let c = &config.clock;
    let _ = writeln!(out, "[clock]");
    let _ = writeln!(out, "start_year = {}", fmt_number(c.start_year()));
    let _ = writeln!(out, "end_year = {}", fmt_number(c.end_year()));
    let _ = writeln!(out, "dt = {}", fmt_number(c.dt()));

    let _ = writeln!(out, "\n[parameters]");
    for key in parameter_keys() {
        let full = format!("parameters.{key}");
        let value = if key == "average_price_mode" {
            format!("\"{}\"", p.rules.average_price_mode.as_str())
        } else {
            fmt_number(p.get(&key).expect("registered key"))
        };
        let _ = writeln!(out, "{key} = {}", entry(config, &full, &value));
    }
    for (section, fields) in [
        (
            "trends.total_generation_capacity",
            &["intercept", "slope", "reference_year"][..],
        ),
        (
            "trends.electricity_consumption",
            &["intercept", "slope", "reference_year"][..],
        ),
        ("effects.social_tolerance", &["y_max", "x_50", "p"][..]),
        ("effects.investor_trust", &["y_max", "x_50", "p"][..]),
        ("effects.om_activity", &["y_max", "x_50", "p"][..]),
    ] {
        let _ = writeln!(out, "\n[{section}]");
        for f in fields {
            let full = format!("{section}.{f}");
            let value = fmt_number(p.get(&full).expect("registered key"));
            let _ = writeln!(out, "{f} = {}", entry(config, &full, &value));
        }
    }

    let _ = writeln!(out, "\n[policy]");
    write_control(
        &mut out,
        config,
        "policy",
        &config.control,
        config.fit_price_delta_unit,
    );

    for s in &config.scenarios {
        let _ = writeln!(out, "\n[[scenario]]");
        let _ = writeln!(out, "name = \"{}\"", s.name);
        let _ = writeln!(out, "policy = \"{}\"", s.control.policy.as_str());
        if !s.outputs.is_empty() {
            let list: Vec<String> = s.outputs.iter().map(|o| format!("\"{o}\"")).collect();
            let _ = writeln!(out, "outputs = [{}]", list.join(", "));
        }
        if s.clock != config.clock {
            let _ = writeln!(out, "\n[scenario.clock]");
            let _ = writeln!(out, "start_year = {}", fmt_number(s.clock.start_year()));
            let _ = writeln!(out, "end_year = {}", fmt_number(s.clock.end_year()));
            let _ = writeln!(out, "dt = {}", fmt_number(s.clock.dt()));
        }
        if !s.overrides.is_empty() {
            let _ = writeln!(out, "\n[scenario.overrides]");
            for (k, v) in &s.overrides {
                let full = format!("scenario.{}.overrides.{k}", s.name);
                let _ = writeln!(out, "\"{k}\" = {}", entry(config, &full, &fmt_number(*v)));
            }
        }
        if s.control.with_policy(config.control.policy) != config.control {
            let _ = writeln!(out, "\n[scenario.policy_settings]");
            let prefix = format!("scenario.{}.policy_settings", s.name);
            write_control(
                &mut out,
                config,
                &prefix,
                &s.control,
                config.fit_price_delta_unit,
            );
        }
    }
    out
}
