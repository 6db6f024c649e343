//! Monte Carlo experiment runner: configuration ingestion, per-seed
//! dispatch to the case engines, result aggregation, and plot emission.
//!
//! A run is a pure function of its [`ExperimentSpec`]: seeds
//! `base_seed..base_seed + n_seeds` each generate a scenario, build the
//! graph, and hand off to the case engine; rows come out in seed order no
//! matter how many workers execute them.

pub mod plots;
pub mod table;

pub use plots::{emit_plots, ExtTargetDetail};
pub use table::{summarize, Cell, ColumnStats, ResultTable, Summary, TableMeta};

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::delivery::{run_delivery_experiment, DeliveryRunConfig};
use crate::error::{Error, Result};
use crate::exttarget::{
    contour_error_rays, run_pipeline, EllipseTarget, GpParams, NoiseParams, PipelineConfig,
    DEFAULT_RING_JITTER_DEG,
};
use crate::scenario::{generate_scenario, Position3, ScenarioConfig};
use crate::selection::{
    select_brute_force, select_none, select_topology_aware, select_user_centric, ObjectiveWeights,
    SelectionResult, DEFAULT_BRUTE_FORCE_MAX_USERS, DEFAULT_QOS_FLOOR_DB,
};
use crate::topology::TopologyGraph;

/// Environment variable overriding the default output root.
pub const OUT_DIR_ENV: &str = "LAWNSIM_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Selection,
    Delivery,
    ExtTarget,
}

impl Case {
    pub fn dir_name(self) -> &'static str {
        match self {
            Case::Selection => "selection",
            Case::Delivery => "delivery",
            Case::ExtTarget => "exttarget",
        }
    }
}

fn default_qos_floor() -> f64 {
    DEFAULT_QOS_FLOOR_DB
}
fn default_bf_max_users() -> usize {
    DEFAULT_BRUTE_FORCE_MAX_USERS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionCaseConfig {
    #[serde(default)]
    pub weights: ObjectiveWeights,
    #[serde(default = "default_qos_floor")]
    pub qos_floor_db: f64,
    /// Also run the exhaustive oracle per seed (small instances only).
    #[serde(default)]
    pub include_brute_force: bool,
    #[serde(default = "default_bf_max_users")]
    pub brute_force_max_users: usize,
}

impl Default for SelectionCaseConfig {
    fn default() -> Self {
        Self {
            weights: ObjectiveWeights::default(),
            qos_floor_db: default_qos_floor(),
            include_brute_force: false,
            brute_force_max_users: default_bf_max_users(),
        }
    }
}

fn default_n_trials() -> usize {
    10_000
}
fn default_proc_delay() -> f64 {
    crate::delivery::DEFAULT_PROC_DELAY_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeliveryCaseConfig {
    #[serde(default = "default_n_trials")]
    pub n_trials: usize,
    #[serde(default = "default_proc_delay")]
    pub proc_delay_s: f64,
    /// Dump per-trial outcomes as JSON lines next to the table.
    #[serde(default)]
    pub dump_trials: bool,
}

impl Default for DeliveryCaseConfig {
    fn default() -> Self {
        Self { n_trials: default_n_trials(), proc_delay_s: default_proc_delay(), dump_trials: false }
    }
}

fn default_ellipse_center() -> [f64; 3] {
    [1000.0, 1000.0, 30.0]
}
fn default_semi_major() -> f64 {
    30.0
}
fn default_semi_minor() -> f64 {
    15.0
}
fn default_orientation() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipseSpec {
    #[serde(default = "default_ellipse_center")]
    pub center: [f64; 3],
    #[serde(default = "default_semi_major")]
    pub semi_major_m: f64,
    #[serde(default = "default_semi_minor")]
    pub semi_minor_m: f64,
    #[serde(default = "default_orientation")]
    pub orientation_rad: f64,
}

impl Default for EllipseSpec {
    fn default() -> Self {
        Self {
            center: default_ellipse_center(),
            semi_major_m: default_semi_major(),
            semi_minor_m: default_semi_minor(),
            orientation_rad: default_orientation(),
        }
    }
}

impl EllipseSpec {
    pub fn to_target(&self) -> Result<EllipseTarget> {
        EllipseTarget::new(
            Position3::new(self.center[0], self.center[1], self.center[2]),
            self.semi_major_m,
            self.semi_minor_m,
            self.orientation_rad,
        )
    }
}

fn default_n_emts() -> usize {
    8
}
fn default_ring_radius() -> f64 {
    100.0
}
fn default_jitter_deg() -> f64 {
    DEFAULT_RING_JITTER_DEG
}
fn default_min_path_excess() -> f64 {
    50.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtTargetCaseConfig {
    #[serde(default)]
    pub target: EllipseSpec,
    #[serde(default = "default_n_emts")]
    pub n_emts: usize,
    #[serde(default = "default_ring_radius")]
    pub ring_radius_m: f64,
    #[serde(default = "default_jitter_deg")]
    pub jitter_deg: f64,
    /// Forward-scatter guard; see `PipelineConfig::min_path_excess_m`.
    #[serde(default = "default_min_path_excess")]
    pub min_path_excess_m: f64,
    #[serde(default)]
    pub noise: NoiseParams,
    #[serde(default)]
    pub gp: GpParams,
}

impl Default for ExtTargetCaseConfig {
    fn default() -> Self {
        Self {
            target: EllipseSpec::default(),
            n_emts: default_n_emts(),
            ring_radius_m: default_ring_radius(),
            jitter_deg: default_jitter_deg(),
            min_path_excess_m: default_min_path_excess(),
            noise: NoiseParams::default(),
            gp: GpParams::default(),
        }
    }
}

impl ExtTargetCaseConfig {
    fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            n_emts: self.n_emts,
            ring_radius_m: self.ring_radius_m,
            jitter_deg: self.jitter_deg,
            min_path_excess_m: self.min_path_excess_m,
            noise: self.noise,
            gp: self.gp,
        }
    }
}

fn default_n_seeds() -> u64 {
    1
}

/// One experiment: scenario and channel blocks shared by every case, plus
/// exactly one case-specific block matching `case`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub case: Case,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub channel: ChannelParams,
    pub threshold_db: f64,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionCaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delivery: Option<DeliveryCaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exttarget: Option<ExtTargetCaseConfig>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.channel.validate()?;
        if self.n_seeds == 0 {
            return Err(Error::InvalidConfig("n_seeds must be >= 1".into()));
        }
        let blocks = [
            ("selection", self.selection.is_some()),
            ("delivery", self.delivery.is_some()),
            ("exttarget", self.exttarget.is_some()),
        ];
        let present: Vec<&str> = blocks.iter().filter(|(_, p)| *p).map(|(n, _)| *n).collect();
        let expected = self.case.dir_name();
        if present.len() != 1 || present[0] != expected {
            return Err(Error::InvalidConfig(format!(
                "spec must carry exactly the `{expected}` block for case {expected}; found [{}]",
                present.join(", ")
            )));
        }
        if let Some(sel) = &self.selection {
            sel.weights.validate()?;
        }
        if let Some(d) = &self.delivery {
            if d.n_trials == 0 {
                return Err(Error::InvalidConfig("delivery.n_trials must be >= 1".into()));
            }
        }
        if let Some(x) = &self.exttarget {
            x.target.to_target()?;
            x.noise.validate()?;
            x.gp.validate()?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// FNV-1a digest of the canonical JSON form; names the output
    /// directory so differing configs never clobber each other.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("spec serializes");
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }

    /// Ready-to-run defaults for each case, at desk scale.
    pub fn default_for(case: Case) -> Self {
        match case {
            // overloaded operating point: 16 users on 4 terminals, fully
            // connected inside a 500 m box, with interfering beams coupled
            // at full array gain so the all-active baseline is genuinely
            // interference-crushed
            Case::Selection => ExperimentSpec {
                case,
                scenario: ScenarioConfig {
                    area_x: 500.0,
                    area_y: 500.0,
                    n_emt_uav: 2,
                    n_emt_terrestrial: 2,
                    n_comm_users: 16,
                    n_charging_users: 4,
                    n_sensing_targets: 1,
                    seed: 1,
                    ..ScenarioConfig::default()
                },
                channel: ChannelParams { offbeam_gain_linear: 4.0, ..ChannelParams::default() },
                threshold_db: -92.0,
                n_seeds: 200,
                base_seed: 1,
                selection: Some(SelectionCaseConfig::default()),
                delivery: None,
                exttarget: None,
            },
            // 128 terminals over the full 2 km box; threshold calibrated
            // so the mean degree lands in [3, 8]
            Case::Delivery => ExperimentSpec {
                case,
                scenario: ScenarioConfig {
                    n_comm_users: 0,
                    n_charging_users: 0,
                    n_sensing_targets: 0,
                    seed: 1,
                    ..ScenarioConfig::default()
                },
                channel: ChannelParams::default(),
                threshold_db: -81.5,
                n_seeds: 1,
                base_seed: 1,
                selection: None,
                delivery: Some(DeliveryCaseConfig::default()),
                exttarget: None,
            },
            Case::ExtTarget => ExperimentSpec {
                case,
                scenario: ScenarioConfig {
                    n_comm_users: 0,
                    n_charging_users: 0,
                    n_sensing_targets: 1,
                    seed: 1,
                    ..ScenarioConfig::default()
                },
                channel: ChannelParams::default(),
                threshold_db: -90.0,
                n_seeds: 100,
                base_seed: 1,
                selection: None,
                delivery: None,
                exttarget: Some(ExtTargetCaseConfig::default()),
            },
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn selection_columns() -> Vec<String> {
    ["seed", "method", "n_active_users", "sum_se", "sensing_sinr_db", "wpt_energy_j", "scalar_objective"]
        .map(String::from)
        .to_vec()
}

fn delivery_columns() -> Vec<String> {
    ["seed", "method", "n_trials", "success_rate", "mean_delay_ms", "median_delay_ms", "mean_hops"]
        .map(String::from)
        .to_vec()
}

fn exttarget_columns() -> Vec<String> {
    [
        "seed",
        "n_points",
        "center_err_m",
        "mean_radial_err_m",
        "max_radial_err_m",
        "mean_true_radius_m",
        "rel_mean_err",
    ]
    .map(String::from)
    .to_vec()
}

fn selection_row(seed: u64, method: &str, r: &SelectionResult) -> Vec<Cell> {
    vec![
        Cell::Num(seed as f64),
        Cell::Str(method.to_string()),
        Cell::Num(r.n_active_users as f64),
        Cell::Num(r.sum_se),
        Cell::Num(r.sensing_sinr_db),
        Cell::Num(r.wpt_energy_j),
        Cell::Num(r.scalar_objective),
    ]
}

/// Rows one seed contributes, plus any side artifacts.
struct SeedOutput {
    rows: Vec<Vec<Cell>>,
    detail: Option<ExtTargetDetail>,
    trial_lines: Option<String>,
}

fn run_seed(spec: &ExperimentSpec, seed: u64) -> Result<SeedOutput> {
    let mut scenario_cfg = spec.scenario.clone();
    scenario_cfg.seed = seed;
    let scenario = generate_scenario(&scenario_cfg)?;

    match spec.case {
        Case::Selection => {
            let cfg = spec.selection.as_ref().expect("validated");
            let graph = TopologyGraph::build(&scenario, &spec.channel, spec.threshold_db)?;
            let mut rows = Vec::new();
            let none = select_none(&graph, &spec.channel, &cfg.weights)?;
            rows.push(selection_row(seed, "no_selection", &none));
            let uc = select_user_centric(&graph, &spec.channel, &cfg.weights, cfg.qos_floor_db)?;
            rows.push(selection_row(seed, "user_centric", &uc));
            let ta = select_topology_aware(&graph, &cfg.weights, &spec.channel)?;
            rows.push(selection_row(seed, "topology_aware", &ta));
            if cfg.include_brute_force {
                let bf =
                    select_brute_force(&graph, &cfg.weights, &spec.channel, cfg.brute_force_max_users)?;
                rows.push(selection_row(seed, "brute_force", &bf));
            }
            Ok(SeedOutput { rows, detail: None, trial_lines: None })
        }
        Case::Delivery => {
            let cfg = spec.delivery.as_ref().expect("validated");
            let run_cfg = DeliveryRunConfig {
                n_trials: cfg.n_trials,
                proc_delay_s: cfg.proc_delay_s,
                seed,
                collect_trials: cfg.dump_trials,
            };
            let agg = run_delivery_experiment(&scenario, &spec.channel, spec.threshold_db, &run_cfg)?;
            let rows = agg
                .per_method
                .iter()
                .map(|m| {
                    vec![
                        Cell::Num(seed as f64),
                        Cell::Str(m.method.to_string()),
                        Cell::Num(m.n_trials as f64),
                        Cell::Num(m.success_rate),
                        Cell::Num(m.mean_delay_ms),
                        Cell::Num(m.median_delay_ms),
                        Cell::Num(m.mean_hops),
                    ]
                })
                .collect();
            let trial_lines = agg.trials.as_ref().map(|trials| {
                let mut out = String::new();
                for t in trials {
                    out.push_str(&serde_json::to_string(t).expect("trial serializes"));
                    out.push('\n');
                }
                out
            });
            Ok(SeedOutput { rows, detail: None, trial_lines })
        }
        Case::ExtTarget => {
            let cfg = spec.exttarget.as_ref().expect("validated");
            let target = cfg.target.to_target()?;
            let out = run_pipeline(&target, &cfg.pipeline_config(), seed)?;
            let rel = out.stats.mean_radial_err_m / out.stats.mean_true_radius_m;
            let rows = vec![vec![
                Cell::Num(seed as f64),
                Cell::Num(out.reflection_points.len() as f64),
                Cell::Num(out.center_err_m),
                Cell::Num(out.stats.mean_radial_err_m),
                Cell::Num(out.stats.max_radial_err_m),
                Cell::Num(out.stats.mean_true_radius_m),
                Cell::Num(rel),
            ]];
            let radius_true = contour_error_rays(&out.estimate, &target);
            let detail = ExtTargetDetail {
                seed,
                truth: target,
                center_hat: out.center_hat,
                reflection_points: out.reflection_points,
                estimate: out.estimate,
                radius_true_m: radius_true,
            };
            Ok(SeedOutput { rows, detail: Some(detail), trial_lines: None })
        }
    }
}

/// A finished run: the table plus side artifacts collected from the first
/// seed (contour detail) and any per-trial dumps.
pub struct RunOutput {
    pub table: ResultTable,
    pub detail: Option<ExtTargetDetail>,
    pub trial_lines: Option<String>,
}

/// Execute the spec seed by seed. `jobs` workers split the seed range;
/// rows are assembled in seed order, so the table is byte-identical for
/// any worker count.
pub fn run_experiment_parallel(spec: &ExperimentSpec, jobs: usize) -> Result<RunOutput> {
    spec.validate()?;
    let jobs = jobs.max(1);
    let columns = match spec.case {
        Case::Selection => selection_columns(),
        Case::Delivery => delivery_columns(),
        Case::ExtTarget => exttarget_columns(),
    };
    let meta = TableMeta {
        spec_hash: spec.hash(),
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
    };

    let n = spec.n_seeds as usize;
    let slots: Mutex<Vec<Option<Result<SeedOutput>>>> = Mutex::new((0..n).map(|_| None).collect());
    let next: Mutex<usize> = Mutex::new(0);

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n) {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().expect("seed counter");
                    if *guard >= n {
                        break;
                    }
                    let idx = *guard;
                    *guard += 1;
                    idx
                };
                let out = run_seed(spec, spec.base_seed + idx as u64);
                slots.lock().expect("result slots")[idx] = Some(out);
            });
        }
    });

    let mut table = ResultTable::new(columns, meta);
    let mut detail = None;
    let mut trial_lines: Option<String> = None;
    for (idx, slot) in slots.into_inner().expect("result slots").into_iter().enumerate() {
        let out = slot.expect("every seed ran").map_err(|e| {
            Error::ContractViolation(format!("seed {} failed: {e}", spec.base_seed + idx as u64))
        })?;
        for row in out.rows {
            table.push_row(row);
        }
        if idx == 0 {
            detail = out.detail;
        }
        if let Some(lines) = out.trial_lines {
            trial_lines.get_or_insert_with(String::new).push_str(&lines);
        }
    }
    Ok(RunOutput { table, detail, trial_lines })
}

/// Single-threaded [`run_experiment_parallel`].
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutput> {
    run_experiment_parallel(spec, 1)
}

/// Resolve the output directory: explicit flag, then `LAWNSIM_OUT_DIR`,
/// then `results/`, content-addressed under `<case>/<spec-hash>/`.
pub fn resolve_out_dir(spec: &ExperimentSpec, flag: Option<&Path>) -> PathBuf {
    let root = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    root.join(spec.case.dir_name()).join(spec.hash())
}

/// Write every artifact of a finished run — table, summary, plots, and
/// the extended-target sidecars — and return the paths written.
pub fn write_run_artifacts(spec: &ExperimentSpec, run: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let table_path = dir.join("table.csv");
    run.table.write_csv(&table_path)?;
    written.push(table_path);

    let summary = summarize(&run.table)?;
    let mut doc = serde_json::to_value(&summary)?;
    if let Some(obj) = doc.as_object_mut() {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        obj.insert("generated_unix_time".into(), serde_json::Value::from(stamp));
    }
    let summary_path = dir.join("summary.json");
    std::fs::write(&summary_path, serde_json::to_string_pretty(&doc)?)?;
    written.push(summary_path);

    if let Some(detail) = &run.detail {
        let detail_path = dir.join("detail.json");
        std::fs::write(&detail_path, serde_json::to_string_pretty(detail)?)?;
        written.push(detail_path);
        let contour_path = dir.join("contour.csv");
        std::fs::write(&contour_path, detail.contour_csv())?;
        written.push(contour_path);
    }
    if let Some(lines) = &run.trial_lines {
        let trials_path = dir.join("trials.jsonl");
        std::fs::write(&trials_path, lines)?;
        written.push(trials_path);
    }

    written.extend(emit_plots(&run.table, spec.case, run.detail.as_ref(), dir)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_selection_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::default_for(Case::Selection);
        spec.scenario.n_comm_users = 5;
        spec.n_seeds = 3;
        spec
    }

    #[test]
    fn default_specs_validate_and_round_trip() {
        for case in [Case::Selection, Case::Delivery, Case::ExtTarget] {
            let spec = ExperimentSpec::default_for(case);
            spec.validate().unwrap();
            let json = spec.to_json().unwrap();
            let back = ExperimentSpec::from_json(&json).unwrap();
            assert_eq!(spec, back);
            assert_eq!(spec.hash(), back.hash());
        }
    }

    #[test]
    fn spec_rejects_mismatched_blocks() {
        let mut spec = ExperimentSpec::default_for(Case::Selection);
        spec.delivery = Some(DeliveryCaseConfig::default());
        assert!(spec.validate().is_err());
        let mut spec = ExperimentSpec::default_for(Case::Delivery);
        spec.delivery = None;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_rejects_unknown_keys() {
        let json = r#"{"case":"selection","threshold_db":-92.0,"bogus":1}"#;
        assert!(ExperimentSpec::from_json(json).is_err());
    }

    #[test]
    fn single_seed_run_equals_direct_engine_call() {
        let mut spec = tiny_selection_spec();
        spec.n_seeds = 1;
        let run = run_experiment(&spec).unwrap();
        assert_eq!(run.table.rows.len(), 3); // three methods

        let mut cfg = spec.scenario.clone();
        cfg.seed = spec.base_seed;
        let scenario = generate_scenario(&cfg).unwrap();
        let graph = TopologyGraph::build(&scenario, &spec.channel, spec.threshold_db).unwrap();
        let weights = spec.selection.as_ref().unwrap().weights;
        let direct = select_none(&graph, &spec.channel, &weights).unwrap();
        let Cell::Num(se) = run.table.rows[0][3] else { panic!("sum_se is numeric") };
        assert_eq!(se, direct.sum_se);
    }

    #[test]
    fn reruns_and_worker_counts_are_byte_identical() {
        let spec = tiny_selection_spec();
        let a = run_experiment(&spec).unwrap().table.to_csv();
        let b = run_experiment(&spec).unwrap().table.to_csv();
        let c = run_experiment_parallel(&spec, 4).unwrap().table.to_csv();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn hash_distinguishes_specs() {
        let a = ExperimentSpec::default_for(Case::Selection);
        let mut b = a.clone();
        b.threshold_db = -91.0;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn fnv_reference_value() {
        // FNV-1a 64 of "a" per the published constants
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
    }

    #[test]
    fn exttarget_run_produces_detail() {
        let mut spec = ExperimentSpec::default_for(Case::ExtTarget);
        spec.n_seeds = 2;
        let run = run_experiment(&spec).unwrap();
        assert_eq!(run.table.rows.len(), 2);
        let detail = run.detail.expect("first-seed detail");
        assert_eq!(detail.seed, spec.base_seed);
        assert_eq!(detail.radius_true_m.len(), detail.estimate.theta_grid.len());
    }

    #[test]
    fn artifacts_land_in_content_addressed_dir() {
        let mut spec = ExperimentSpec::default_for(Case::ExtTarget);
        spec.n_seeds = 1;
        let run = run_experiment(&spec).unwrap();
        let tmp = std::env::temp_dir().join(format!("lawnsim_test_{}", std::process::id()));
        let dir = tmp.join(spec.case.dir_name()).join(spec.hash());
        let written = write_run_artifacts(&spec, &run, &dir).unwrap();
        assert!(written.iter().any(|p| p.ends_with("table.csv")));
        assert!(written.iter().any(|p| p.ends_with("summary.json")));
        assert!(written.iter().any(|p| p.ends_with("contour.csv")));
        assert!(written.iter().any(|p| p.ends_with("exttarget_contour.svg")));
        std::fs::remove_dir_all(&tmp).ok();
    }
}
