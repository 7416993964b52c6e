// Copyright 2026 The qlga-opt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Line-oriented experiment configuration: `key = value` entries under
//! explicit `[section]` headers, with `#` comments. Every diagnostic is
//! anchored to the line it came from.
//!
//! Sections: `[lattice]` (shared discretization), one `[configuration]`
//! per candidate lattice (occupancies and walls), `[qoi]` (region,
//! channels, weights, accumulation steps), `[pipeline]` (steps, marker
//! encoding, collision, mapping, estimation width, search parameters).
//! `name` and `seed` live above the first section.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use qlga_core::lattice::{BoundaryLink, CollisionModel, LatticeSpec, QoISpec};
use qlga_core::mapping::MappingSpec;
use qlga_core::parallel::{ConfigurationSet, MarkerEncoding};
use qlga_core::search::{MinFindParams, PipelineSpec};
use qlga_core::DEFAULT_QUBIT_CAP;

/// A parse or validation failure anchored to a config line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: String,
    pub seed: u64,
    pub spec: PipelineSpec,
    pub repetitions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Lattice,
    Configuration(usize),
    Qoi,
    Pipeline,
}

/// One `key [index] = values` entry with its source line.
#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    index: Option<usize>,
    value: String,
}

#[derive(Debug, Default, Clone)]
struct RawSection {
    header_line: usize,
    entries: Vec<Entry>,
}

impl RawSection {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key && e.index.is_none())
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }
}

fn parse_entry(line_no: usize, text: &str) -> Result<Entry, ConfigError> {
    let Some((lhs, rhs)) = text.split_once('=') else {
        return Err(ConfigError::new(
            line_no,
            format!("expected `key = value`, got `{text}`"),
        ));
    };
    let mut lhs_parts = lhs.split_whitespace();
    let key = lhs_parts
        .next()
        .ok_or_else(|| ConfigError::new(line_no, "missing key before `=`"))?
        .to_string();
    let index = match lhs_parts.next() {
        Some(tok) => Some(tok.parse::<usize>().map_err(|_| {
            ConfigError::new(line_no, format!("key index `{tok}` is not an integer"))
        })?),
        None => None,
    };
    if lhs_parts.next().is_some() {
        return Err(ConfigError::new(line_no, "too many tokens before `=`"));
    }
    Ok(Entry {
        line: line_no,
        key,
        index,
        value: rhs.trim().to_string(),
    })
}

fn parse_u64(e: &Entry) -> Result<u64, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError::new(e.line, format!("`{}` expects an integer", e.key)))
}

fn parse_usize(e: &Entry) -> Result<usize, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError::new(e.line, format!("`{}` expects an integer", e.key)))
}

fn parse_f64(e: &Entry) -> Result<f64, ConfigError> {
    e.value
        .parse()
        .map_err(|_| ConfigError::new(e.line, format!("`{}` expects a number", e.key)))
}

fn parse_int_list(e: &Entry) -> Result<Vec<i64>, ConfigError> {
    e.value
        .split_whitespace()
        .map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| ConfigError::new(e.line, format!("`{tok}` is not an integer")))
        })
        .collect()
}

fn require<'a>(sec: &'a RawSection, key: &str, what: &str) -> Result<&'a Entry, ConfigError> {
    sec.get(key)
        .ok_or_else(|| ConfigError::new(sec.header_line, format!("{what} requires `{key} = ...`")))
}

/// Resolves a coordinate list (one integer per dimension) to a gridpoint
/// index, naming the offending coordinates on failure.
fn gridpoint(
    lattice: &LatticeSpec,
    coords: &[i64],
    line: usize,
) -> Result<usize, ConfigError> {
    if coords.len() != lattice.dims {
        return Err(ConfigError::new(
            line,
            format!(
                "expected {} coordinate(s), got {}",
                lattice.dims,
                coords.len()
            ),
        ));
    }
    let mut resolved = Vec::with_capacity(coords.len());
    for (d, &c) in coords.iter().enumerate() {
        if c < 0 || c as usize >= lattice.shape[d] {
            return Err(ConfigError::new(
                line,
                format!(
                    "gridpoint {coords:?} outside the {:?} grid (dimension {d})",
                    lattice.shape
                ),
            ));
        }
        resolved.push(c as usize);
    }
    lattice
        .grid_index(&resolved)
        .map_err(|e| ConfigError::new(line, e.to_string()))
}

fn check_channel(q: usize, c: i64, line: usize) -> Result<usize, ConfigError> {
    if c < 0 || c as usize >= q {
        return Err(ConfigError::new(
            line,
            format!("unknown channel index {c} (lattice has {q} channels)"),
        ));
    }
    Ok(c as usize)
}

/// Parses and validates a full experiment configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut preamble = RawSection::default();
    let mut lattice_sec: Option<RawSection> = None;
    let mut config_secs: Vec<RawSection> = Vec::new();
    let mut qoi_sec: Option<RawSection> = None;
    let mut pipeline_sec: Option<RawSection> = None;
    let mut current = Section::Preamble;

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return Err(ConfigError::new(line_no, "unterminated section header"));
            };
            current = match name.trim() {
                "lattice" => {
                    if lattice_sec.is_some() {
                        return Err(ConfigError::new(line_no, "duplicate [lattice] section"));
                    }
                    lattice_sec = Some(RawSection {
                        header_line: line_no,
                        ..Default::default()
                    });
                    Section::Lattice
                }
                "configuration" => {
                    config_secs.push(RawSection {
                        header_line: line_no,
                        ..Default::default()
                    });
                    Section::Configuration(config_secs.len() - 1)
                }
                "qoi" => {
                    if qoi_sec.is_some() {
                        return Err(ConfigError::new(line_no, "duplicate [qoi] section"));
                    }
                    qoi_sec = Some(RawSection {
                        header_line: line_no,
                        ..Default::default()
                    });
                    Section::Qoi
                }
                "pipeline" => {
                    if pipeline_sec.is_some() {
                        return Err(ConfigError::new(line_no, "duplicate [pipeline] section"));
                    }
                    pipeline_sec = Some(RawSection {
                        header_line: line_no,
                        ..Default::default()
                    });
                    Section::Pipeline
                }
                other => {
                    return Err(ConfigError::new(
                        line_no,
                        format!("unknown section [{other}]"),
                    ));
                }
            };
            continue;
        }
        let entry = parse_entry(line_no, line)?;
        match current {
            Section::Preamble => preamble.entries.push(entry),
            Section::Lattice => lattice_sec.as_mut().unwrap().entries.push(entry),
            Section::Configuration(i) => config_secs[i].entries.push(entry),
            Section::Qoi => qoi_sec.as_mut().unwrap().entries.push(entry),
            Section::Pipeline => pipeline_sec.as_mut().unwrap().entries.push(entry),
        }
    }

    let lattice_sec =
        lattice_sec.ok_or_else(|| ConfigError::new(1, "missing [lattice] section"))?;
    let qoi_sec = qoi_sec.ok_or_else(|| ConfigError::new(1, "missing [qoi] section"))?;
    let pipeline_sec =
        pipeline_sec.ok_or_else(|| ConfigError::new(1, "missing [pipeline] section"))?;
    if config_secs.is_empty() {
        return Err(ConfigError::new(
            1,
            "at least one [configuration] section is required",
        ));
    }

    // Preamble.
    let name = preamble
        .get("name")
        .map(|e| e.value.clone())
        .unwrap_or_else(|| String::from("experiment"));
    let seed = match preamble.get("seed") {
        Some(e) => parse_u64(e)?,
        None => 0,
    };
    for e in &preamble.entries {
        if e.key != "name" && e.key != "seed" {
            return Err(ConfigError::new(
                e.line,
                format!("unknown top-level key `{}`", e.key),
            ));
        }
    }

    // Shared lattice discretization.
    let dims = parse_usize(require(&lattice_sec, "dims", "[lattice]")?)?;
    let shape_entry = require(&lattice_sec, "shape", "[lattice]")?;
    let shape: Vec<usize> = parse_int_list(shape_entry)?
        .into_iter()
        .map(|v| {
            if v <= 0 {
                Err(ConfigError::new(shape_entry.line, "extents must be positive"))
            } else {
                Ok(v as usize)
            }
        })
        .collect::<Result<_, _>>()?;
    let q = parse_usize(require(&lattice_sec, "channels", "[lattice]")?)?;
    let mut velocities = vec![None; q];
    for e in lattice_sec.all("velocity") {
        let Some(c) = e.index else {
            return Err(ConfigError::new(e.line, "expected `velocity I = ...`"));
        };
        if c >= q {
            return Err(ConfigError::new(
                e.line,
                format!("unknown channel index {c} (lattice has {q} channels)"),
            ));
        }
        let comps = parse_int_list(e)?;
        if comps.len() != dims {
            return Err(ConfigError::new(
                e.line,
                format!("velocity needs {dims} component(s)"),
            ));
        }
        let mut v = [0i64; 2];
        v[..comps.len()].copy_from_slice(&comps);
        velocities[c] = Some((e.line, v));
    }
    let mut channel_velocities = Vec::with_capacity(q);
    for (c, slot) in velocities.into_iter().enumerate() {
        match slot {
            Some((_, v)) => channel_velocities.push(v),
            None => {
                return Err(ConfigError::new(
                    lattice_sec.header_line,
                    format!("missing `velocity {c} = ...`"),
                ));
            }
        }
    }
    let rest_weight = match lattice_sec.get("rest_weight") {
        Some(e) => parse_u64(e)?,
        None => 2,
    };
    let periodic = match lattice_sec.get("periodic") {
        Some(e) => match e.value.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(ConfigError::new(e.line, "`periodic` expects true or false")),
        },
        None => true,
    };
    for e in &lattice_sec.entries {
        if !matches!(
            e.key.as_str(),
            "dims" | "shape" | "channels" | "velocity" | "rest_weight" | "periodic"
        ) {
            return Err(ConfigError::new(
                e.line,
                format!("unknown [lattice] key `{}`", e.key),
            ));
        }
    }

    let mut base = LatticeSpec::new(dims, shape, channel_velocities)
        .map_err(|err| ConfigError::new(lattice_sec.header_line, err.to_string()))?;
    base.rest_weight = rest_weight;
    base.periodic = periodic;

    // Per-configuration occupancies and walls.
    let mut lattices = Vec::with_capacity(config_secs.len());
    for sec in &config_secs {
        let mut lat = base.clone();
        for e in &sec.entries {
            match e.key.as_str() {
                "occupied" => {
                    let vals = parse_int_list(e)?;
                    if vals.len() != dims + 1 {
                        return Err(ConfigError::new(
                            e.line,
                            format!("`occupied` expects {} coordinate(s) and a channel", dims),
                        ));
                    }
                    let g = gridpoint(&lat, &vals[..dims], e.line)?;
                    let c = check_channel(q, vals[dims], e.line)?;
                    lat.initial_occupancy.insert((g, c));
                }
                "wall" => {
                    let vals = parse_int_list(e)?;
                    if vals.len() != dims + 2 {
                        return Err(ConfigError::new(
                            e.line,
                            format!(
                                "`wall` expects {} coordinate(s) and two paired channels",
                                dims
                            ),
                        ));
                    }
                    let g = gridpoint(&lat, &vals[..dims], e.line)?;
                    let a = check_channel(q, vals[dims], e.line)?;
                    let b = check_channel(q, vals[dims + 1], e.line)?;
                    if a == b {
                        return Err(ConfigError::new(
                            e.line,
                            "a wall must pair two distinct channels",
                        ));
                    }
                    lat.boundary_links.insert(BoundaryLink::new(g, a, b));
                }
                other => {
                    return Err(ConfigError::new(
                        e.line,
                        format!("unknown [configuration] key `{other}`"),
                    ));
                }
            }
        }
        lat.validate()
            .map_err(|err| ConfigError::new(sec.header_line, err.to_string()))?;
        lattices.push(lat);
    }

    // Quantity of interest.
    let mut region = BTreeSet::new();
    for e in qoi_sec.all("region") {
        let coords = parse_int_list(e)?;
        region.insert(gridpoint(&base, &coords, e.line)?);
    }
    let channels_entry = require(&qoi_sec, "channels", "[qoi]")?;
    let mut channels = BTreeSet::new();
    for c in parse_int_list(channels_entry)? {
        channels.insert(check_channel(q, c, channels_entry.line)?);
    }
    let mut weights: BTreeMap<usize, u64> = channels
        .iter()
        .map(|&c| (c, base.channel_weight(c).min(2)))
        .collect();
    for e in qoi_sec.all("weight") {
        let Some(c) = e.index else {
            return Err(ConfigError::new(e.line, "expected `weight I = ...`"));
        };
        if !channels.contains(&c) {
            return Err(ConfigError::new(
                e.line,
                format!("weight for channel {c} which is not in the channel set"),
            ));
        }
        weights.insert(c, parse_u64(e)?);
    }
    let mut acc_steps = BTreeSet::new();
    if let Some(e) = qoi_sec.get("acc_steps") {
        for t in parse_int_list(e)? {
            if t <= 0 {
                return Err(ConfigError::new(e.line, "accumulation steps are 1-based"));
            }
            acc_steps.insert(t as usize);
        }
    }
    for e in &qoi_sec.entries {
        if !matches!(e.key.as_str(), "region" | "channels" | "weight" | "acc_steps") {
            return Err(ConfigError::new(
                e.line,
                format!("unknown [qoi] key `{}`", e.key),
            ));
        }
    }
    let qoi = QoISpec::new(&base, region, channels, weights, acc_steps)
        .map_err(|err| ConfigError::new(qoi_sec.header_line, err.to_string()))?;

    // Pipeline parameters.
    let n_t = parse_usize(require(&pipeline_sec, "steps", "[pipeline]")?)?;
    let marker = match pipeline_sec.get("marker").map(|e| (e.line, e.value.as_str())) {
        Some((_, "compact")) | None => MarkerEncoding::Compact,
        Some((_, "onehot")) => MarkerEncoding::OneHot,
        Some((line, other)) => {
            return Err(ConfigError::new(
                line,
                format!("unknown marker encoding `{other}` (compact | onehot)"),
            ));
        }
    };
    let collision = match pipeline_sec
        .get("collision")
        .map(|e| (e.line, e.value.as_str()))
    {
        Some((_, "identity")) | None => CollisionModel::Identity,
        Some((_, "hpp")) => CollisionModel::HppPermutation,
        Some((line, "rotation")) => {
            let theta = match pipeline_sec.get("theta_c") {
                Some(e) => parse_f64(e)?,
                None => {
                    return Err(ConfigError::new(
                        line,
                        "rotation collision requires `theta_c = ...`",
                    ));
                }
            };
            CollisionModel::ParametrizedRotation(theta)
        }
        Some((line, other)) => {
            return Err(ConfigError::new(
                line,
                format!("unknown collision model `{other}` (identity | hpp | rotation)"),
            ));
        }
    };
    let e_entry = require(&pipeline_sec, "e", "[pipeline]")?;
    let e_width = parse_usize(e_entry)?;
    if e_width == 0 {
        return Err(ConfigError::new(
            e_entry.line,
            "estimation width e must be at least 1",
        ));
    }
    let mapping = match pipeline_sec
        .get("mapping")
        .map(|e| (e.line, e.value.as_str()))
    {
        Some((_, "linear")) | None => MappingSpec::linear_comparison(),
        Some((line, "rotation")) => match pipeline_sec.get("alpha") {
            Some(a) => MappingSpec::weighted_rotation_with_alpha(&qoi, parse_f64(a)?)
                .map_err(|err| ConfigError::new(a.line, err.to_string()))?,
            None => MappingSpec::weighted_rotation(&qoi)
                .map_err(|err| ConfigError::new(line, err.to_string()))?,
        },
        Some((line, other)) => {
            return Err(ConfigError::new(
                line,
                format!("unknown mapping `{other}` (linear | rotation)"),
            ));
        }
    };
    let lambda = match pipeline_sec.get("lambda") {
        Some(e) => {
            let v = parse_f64(e)?;
            if v <= 1.0 || v >= 4.0 / 3.0 {
                return Err(ConfigError::new(e.line, "lambda must lie in (1, 4/3)"));
            }
            v
        }
        None => 1.2,
    };
    let budget_c = match pipeline_sec.get("budget_c") {
        Some(e) => parse_f64(e)?,
        None => 3.0,
    };
    let budget_override = match pipeline_sec.get("budget") {
        Some(e) => Some(parse_u64(e)?),
        None => None,
    };
    let repetitions = match pipeline_sec.get("repetitions") {
        Some(e) => {
            let k = parse_usize(e)?;
            if k == 0 || k % 2 == 0 {
                return Err(ConfigError::new(
                    e.line,
                    format!("repetition count must be odd, got {k}"),
                ));
            }
            k
        }
        None => 1,
    };
    for e in &pipeline_sec.entries {
        if !matches!(
            e.key.as_str(),
            "steps"
                | "marker"
                | "collision"
                | "theta_c"
                | "mapping"
                | "alpha"
                | "e"
                | "lambda"
                | "budget_c"
                | "budget"
                | "repetitions"
        ) {
            return Err(ConfigError::new(
                e.line,
                format!("unknown [pipeline] key `{}`", e.key),
            ));
        }
    }

    // Accumulation steps must fall within the evolution.
    for &t in &qoi.acc_steps {
        if t > n_t {
            return Err(ConfigError::new(
                qoi_sec.header_line,
                format!("accumulation step {t} exceeds steps = {n_t}"),
            ));
        }
    }

    let configs = ConfigurationSet::new(lattices, marker)
        .map_err(|err| ConfigError::new(1, err.to_string()))?;
    // Collision models with structural requirements fail here, not at
    // simulation time.
    collision
        .matrix(configs.lattice(0))
        .map_err(|err| ConfigError::new(pipeline_sec.header_line, err.to_string()))?;

    let spec = PipelineSpec {
        configs,
        collision,
        n_t,
        qoi,
        mapping,
        e: e_width,
        minfind: MinFindParams {
            lambda,
            budget_c,
            budget_override,
        },
        qubit_cap: DEFAULT_QUBIT_CAP,
    };
    Ok(RunConfig {
        name,
        seed,
        spec,
        repetitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
name = smoke
seed = 7

[lattice]
dims = 1
shape = 4
channels = 2
velocity 0 = -1
velocity 1 = 1

[configuration]
occupied = 0 1

[configuration]
occupied = 0 1
occupied = 0 0

[qoi]
region = 2
channels = 0 1
acc_steps = 2

[pipeline]
steps = 2
e = 4
";

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.name, "smoke");
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.spec.configs.len(), 2);
        assert_eq!(cfg.spec.n_t, 2);
        assert_eq!(cfg.spec.e, 4);
        assert_eq!(cfg.repetitions, 1);
        assert_eq!(cfg.spec.qoi.f_max(), 2);
    }

    #[test]
    fn region_outside_grid_names_the_gridpoint() {
        let bad = MINIMAL.replace("region = 2", "region = 9");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("gridpoint [9]"), "{err}");
        assert_eq!(err.line, 18);
    }

    #[test]
    fn even_repetitions_rejected() {
        let bad = format!("{MINIMAL}repetitions = 4\n");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("odd"), "{err}");
    }

    #[test]
    fn unknown_channel_rejected() {
        let bad = MINIMAL.replace("channels = 0 1\nacc_steps", "channels = 0 5\nacc_steps");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("unknown channel index 5"), "{err}");
    }

    #[test]
    fn zero_e_rejected() {
        let bad = MINIMAL.replace("e = 4", "e = 0");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("at least 1"), "{err}");
    }

    #[test]
    fn missing_velocity_rejected() {
        let bad = MINIMAL.replace("velocity 1 = 1\n", "");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("velocity 1"), "{err}");
    }

    #[test]
    fn acc_step_beyond_steps_rejected() {
        let bad = MINIMAL.replace("acc_steps = 2", "acc_steps = 3");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("exceeds steps"), "{err}");
    }

    #[test]
    fn duplicate_wall_channel_rejected() {
        let bad = MINIMAL.replace(
            "occupied = 0 1\n\n[qoi]",
            "occupied = 0 1\nwall = 3 0 1\nwall = 3 1 0\n\n[qoi]",
        );
        let err = parse_config(&bad).unwrap_err();
        assert!(err.message.contains("two boundary links"), "{err}");
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let commented = MINIMAL.replace("steps = 2", "steps = 2  # two evolution steps");
        assert!(parse_config(&commented).is_ok());
    }

    #[test]
    fn two_dimensional_coordinates() {
        let cfg = parse_config(
            "\
[lattice]
dims = 2
shape = 2 2
channels = 4
velocity 0 = 1 0
velocity 1 = 0 1
velocity 2 = -1 0
velocity 3 = 0 -1

[configuration]
occupied = 0 1 0
wall = 1 1 0 2

[qoi]
region = 1 1
channels = 0
acc_steps = 1

[pipeline]
steps = 1
collision = hpp
mapping = rotation
e = 3
",
        )
        .unwrap();
        let lat = cfg.spec.configs.lattice(0);
        assert_eq!(lat.initial_occupancy.iter().next().unwrap(), &(1, 0));
        assert_eq!(lat.boundary_links.iter().next().unwrap().gridpoint, 3);
        assert!(cfg.spec.qoi.region.contains(&3));
    }
}
