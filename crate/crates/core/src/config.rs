//! Scenario files.
//!
//! A config is a flat list of `key = value` lines with `#` comments. Keys at
//! the top level apply to every scenario read from the file; a
//! `[scenario.<name>]` section overrides them for the scenario called
//! `<name>`. A scenario starts from a depth preset (`preset = "deep"`, the
//! section name when it names a preset, or the caller's choice) and every
//! key left unset keeps the preset default.
//!
//! ```text
//! # 30 W transmitter, denser jammers
//! tx_power = 30
//! intensity_per_km2 = 0.03
//!
//! [scenario.deep]
//! jam_power = 40
//! ```
//!
//! A `[sweep]` table in the same file is read by [`crate::sweep`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::analysis::{Preset, Scenario};
use crate::error::{Error, Result};
use crate::sweep::SweepTable;
use crate::uwchannel::{default_dmax_km, psi_from_taps, FadingParams, TapProfile};

macro_rules! scenario_keys {
    ($($key:ident: $ty:ty),* $(,)?) => {
        /// Scenario keys set in one place of a config file.
        #[derive(Debug, Clone, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Overrides {
            pub preset: Option<String>,
            pub label: Option<String>,
            $(pub $key: Option<$ty>,)*
        }

        #[derive(Debug, Default, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct RawFile {
            preset: Option<String>,
            label: Option<String>,
            $($key: Option<$ty>,)*
            #[serde(default)]
            scenario: BTreeMap<String, Overrides>,
            sweep: Option<SweepTable>,
        }

        impl RawFile {
            fn top(&self) -> Overrides {
                Overrides {
                    preset: self.preset.clone(),
                    label: self.label.clone(),
                    $($key: self.$key.clone(),)*
                }
            }
        }

        impl Overrides {
            /// `self` with the keys set in `other` replaced.
            fn merged(&self, other: &Overrides) -> Overrides {
                Overrides {
                    preset: other.preset.clone().or_else(|| self.preset.clone()),
                    label: other.label.clone().or_else(|| self.label.clone()),
                    $($key: other.$key.clone().or_else(|| self.$key.clone()),)*
                }
            }
        }
    };
}

scenario_keys! {
    frequency_khz: f64,
    bandwidth_hz: f64,
    spreading_factor: f64,
    noise_level_db: f64,
    noise_decay: f64,
    source_level_db: f64,
    depth_km: f64,
    dmax_km: f64,
    intensity_per_km2: f64,
    jam_power: f64,
    trunc_radius_km: f64,
    jammer_psi: f64,
    tx_power: f64,
    sjnr_threshold: f64,
    static_power: f64,
    tap_delays_s: Vec<f64>,
    tap_gains: Vec<f64>,
}

/// A parsed config file.
#[derive(Debug, Default)]
pub struct ConfigFile {
    top: Overrides,
    sections: BTreeMap<String, Overrides>,
    pub sweep: Option<SweepTable>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            top: raw.top(),
            sections: raw.scenario,
            sweep: raw.sweep,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Names of the `[scenario.<name>]` sections.
    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    /// The scenario called `name`: its section if there is one, else the
    /// preset of that name, with the top-level keys underneath.
    pub fn scenario_named(&self, name: &str) -> Result<Scenario> {
        let mut keys = self.top.clone();
        match self.sections.get(name) {
            Some(section) => {
                keys = keys.merged(section);
                if section.preset.is_none() && Preset::parse(name).is_some() {
                    keys.preset = Some(name.to_string());
                }
            }
            None => {
                Preset::parse(name).ok_or_else(|| {
                    Error::Config(format!("unknown scenario `{name}`: not a preset and no [scenario.{name}] section"))
                })?;
                keys.preset = Some(name.to_string());
            }
        }
        if keys.label.is_none() {
            keys.label = Some(name.to_string());
        }
        build(&keys, Preset::Shallow)
    }

    /// The file's single scenario. `preset`, when given, selects the preset
    /// (and the section of that name, if present); otherwise the file must
    /// have at most one section, and the preset comes from the `preset` key
    /// or defaults to shallow water.
    pub fn scenario(&self, preset: Option<Preset>) -> Result<Scenario> {
        if let Some(p) = preset {
            return self.scenario_named(p.name());
        }
        let mut names = self.section_names();
        match (names.next(), names.next()) {
            (None, _) => build(&self.top, Preset::Shallow),
            (Some(name), None) => self.scenario_named(name),
            (Some(_), Some(_)) => Err(Error::Config(
                "several [scenario.*] sections; choose one with a preset".to_string(),
            )),
        }
    }
}

/// Reads the scenario of a config file; see [`ConfigFile::scenario`].
pub fn load_config(path: &Path, preset: Option<Preset>) -> Result<Scenario> {
    ConfigFile::read(path)?.scenario(preset)
}

fn build(keys: &Overrides, fallback: Preset) -> Result<Scenario> {
    let preset = match &keys.preset {
        Some(name) => Preset::parse(name)
            .ok_or_else(|| Error::invalid("preset", format!("expected shallow, mid or deep, got `{name}`")))?,
        None => fallback,
    };
    let mut sc = Scenario::preset(preset);
    if let Some(label) = &keys.label {
        sc.label = label.clone();
    }

    let env = &mut sc.env;
    set(&mut env.frequency_khz, keys.frequency_khz);
    set(&mut env.bandwidth_hz, keys.bandwidth_hz);
    set(&mut env.spreading_factor, keys.spreading_factor);
    set(&mut env.noise_level_db, keys.noise_level_db);
    set(&mut env.noise_decay, keys.noise_decay);
    set(&mut env.source_level_db, keys.source_level_db);
    if let Some(depth) = keys.depth_km {
        env.depth_km = depth;
        env.dmax_km = default_dmax_km(depth);
    }
    set(&mut env.dmax_km, keys.dmax_km);

    match (&keys.tap_delays_s, &keys.tap_gains) {
        (None, None) => {}
        (Some(d), Some(g)) => sc.taps = TapProfile::from_parts(d, g)?,
        _ => return Err(Error::invalid("taps", "tap_delays_s and tap_gains must be given together")),
    }

    let field = &mut sc.field;
    field.depth_km = sc.env.depth_km;
    set(&mut field.intensity_per_km2, keys.intensity_per_km2);
    set(&mut field.jam_power, keys.jam_power);
    set(&mut field.trunc_radius_km, keys.trunc_radius_km);
    field.jammer_fading = match keys.jammer_psi {
        Some(psi) => FadingParams::new(psi).map_err(|_| Error::invalid("jammer_psi", "must be finite and >= 0"))?,
        None => psi_from_taps(&sc.taps, sc.env.frequency_khz),
    };

    set(&mut sc.link.tx_power, keys.tx_power);
    set(&mut sc.link.sjnr_threshold, keys.sjnr_threshold);
    set(&mut sc.link.static_power, keys.static_power);

    sc.validate()?;
    Ok(sc)
}

fn set(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Every parameter of `scenario` as a config file that loads back to the
/// same scenario.
pub fn dump_config(scenario: &Scenario) -> String {
    let env = &scenario.env;
    let field = &scenario.field;
    let link = &scenario.link;
    let list = |xs: Vec<f64>| xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
    let mut out = String::new();
    let _ = writeln!(out, "label = {}", toml::Value::String(scenario.label.clone()));
    for (key, value) in [
        ("frequency_khz", env.frequency_khz),
        ("bandwidth_hz", env.bandwidth_hz),
        ("spreading_factor", env.spreading_factor),
        ("noise_level_db", env.noise_level_db),
        ("noise_decay", env.noise_decay),
        ("source_level_db", env.source_level_db),
        ("depth_km", env.depth_km),
        ("dmax_km", env.dmax_km),
        ("intensity_per_km2", field.intensity_per_km2),
        ("jam_power", field.jam_power),
        ("trunc_radius_km", field.trunc_radius_km),
        ("jammer_psi", field.jammer_fading.psi),
        ("tx_power", link.tx_power),
        ("sjnr_threshold", link.sjnr_threshold),
        ("static_power", link.static_power),
    ] {
        let _ = writeln!(out, "{key} = {}", fmt_f64(value));
    }
    let taps = &scenario.taps.taps;
    let _ = writeln!(out, "tap_delays_s = [{}]", list(taps.iter().map(|t| t.delay_s).collect()));
    let _ = writeln!(out, "tap_gains = [{}]", list(taps.iter().map(|t| t.mean_gain).collect()));
    out
}

/// Shortest round-trip decimal that TOML reads back as a float.
fn fmt_f64(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'i', 'N']) {
        s
    } else {
        s + ".0"
    }
}
