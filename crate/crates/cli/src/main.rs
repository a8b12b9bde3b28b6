//! `sparsedet`: encode/decode box targets, rotated IoU, target assignment,
//! NMS, mAP evaluation and synthetic scene generation over text files.
//!
//! Exit codes: 0 on success, 1 on bad input, 2 on an internal failure.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Display, Write as _};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsedet_core::eval::{generate_scene, pr_curve, SceneSpec};
use sparsedet_core::io::{self, DetRecord, GtRecord, Precision, TargetRecord};
use sparsedet_core::postprocess::nms_rotated_indices;
use sparsedet_core::{
    assign, decode_obb, encode_obb, evaluate, iou_aabb, iou_obb, level_locations, match_detections, prune_topk,
    voxelize, AssignmentConfig, AxisAlignedBox3, BoxDeltas, Detection, GroundTruth, LevelSpec, Location3, Mode,
    OrientedBox3, PointCloud, SparseVoxelSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::Config;

#[derive(Debug)]
enum CliError {
    Input(String),
    Internal(String),
}

impl Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<sparsedet_core::Error> for CliError {
    fn from(e: sparsedet_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn input_err(context: impl Display, e: impl Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

#[derive(Parser)]
#[command(name = "sparsedet", version, about = "Anchor-free 3D detection geometry toolkit")]
struct Cli {
    /// TOML file with default parameter values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print floats with round-trip precision instead of 6 decimals.
    #[arg(long, global = true)]
    exact: bool,
    /// Write results here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode boxes as regression deltas relative to a location.
    Encode(EncodeArgs),
    /// Decode regression deltas (or assignment targets) into boxes.
    Decode(DecodeArgs),
    /// IoU of box pairs.
    Iou(IouArgs),
    /// Assign ground-truth boxes to sparse feature-level locations.
    Assign(AssignArgs),
    /// Keep the top-scoring voxels of a scored voxel list.
    Prune(PruneArgs),
    /// Per-scene, per-class greedy rotated NMS.
    Nms(NmsArgs),
    /// Average precision per class and mAP.
    Eval(EvalArgs),
    /// Generate seeded synthetic scenes.
    Gen(GenArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// aabb, naive, sincos or mobius.
    #[arg(long)]
    mode: Option<String>,
    /// Location as x,y,z.
    #[arg(long)]
    location: String,
    /// A single box as x,y,z,w,l,h,theta.
    #[arg(long = "box", allow_hyphen_values = true)]
    bbox: Option<String>,
    /// File of `x y z w l h theta` lines ("-" for stdin).
    input: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    mode: Option<String>,
    /// Location as x,y,z.
    #[arg(long, conflicts_with = "targets")]
    location: Option<String>,
    /// A single delta tuple, comma separated.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "targets")]
    deltas: Option<String>,
    /// Assignment target file; writes one detection per target.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Score decoded targets 1 instead of by their centerness.
    #[arg(long, requires = "targets")]
    no_centerness: bool,
    /// File of delta lines ("-" for stdin).
    input: Option<PathBuf>,
}

#[derive(Args)]
struct IouArgs {
    #[arg(long, allow_hyphen_values = true, requires = "b")]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    b: Option<String>,
    /// Use the rotated-box IoU. Without it both boxes must have theta = 0.
    #[arg(long)]
    rotated: bool,
    /// File of 14-number lines: box a then box b ("-" for stdin).
    input: Option<PathBuf>,
}

#[derive(Args)]
struct AssignArgs {
    /// Ground-truth file.
    #[arg(long)]
    gt: PathBuf,
    /// Point cloud of one scene.
    #[arg(long, conflicts_with = "points_dir")]
    points: Option<PathBuf>,
    /// Scene id for `--points`; defaults to the only scene in the GT file.
    #[arg(long, requires = "points")]
    scene: Option<String>,
    /// Directory with one `<scene_id>.txt` point cloud per GT scene.
    #[arg(long)]
    points_dir: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    voxel_size: Option<f64>,
    #[arg(long)]
    first_stride: Option<u32>,
    #[arg(long)]
    n_loc: Option<usize>,
    /// Center-sampling count per box.
    #[arg(long)]
    k: Option<usize>,
    /// Point budget; larger clouds are subsampled with `--seed`.
    #[arg(long)]
    n_pts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long)]
    n_vox: Option<usize>,
    /// File of `ix iy iz score` lines ("-" for stdin).
    input: Option<PathBuf>,
}

#[derive(Args)]
struct NmsArgs {
    #[arg(long)]
    iou_threshold: Option<f64>,
    /// Detection file ("-" for stdin).
    input: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    dets: PathBuf,
    /// Comma-separated IoU thresholds.
    #[arg(long)]
    thresholds: Option<String>,
    /// Match with axis-aligned IoU; every theta must be 0.
    #[arg(long)]
    axis_aligned: bool,
    /// Defaults to the largest label seen plus one.
    #[arg(long)]
    num_classes: Option<usize>,
    /// Write `pr_class<c>_iou<t>.txt` curves here.
    #[arg(long)]
    pr_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    scenes: usize,
    #[arg(long, default_value_t = 5)]
    boxes: usize,
    /// Surface points per box.
    #[arg(long, default_value_t = 2000)]
    points: usize,
    /// Floor points per scene.
    #[arg(long, default_value_t = 2000)]
    clutter: usize,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    #[arg(long)]
    axis_aligned: bool,
    /// Output directory for `gt.txt` and the scene clouds.
    #[arg(long)]
    out: PathBuf,
}

struct Ctx {
    cfg: Config,
    precision: Precision,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Input(_) => 1,
                CliError::Internal(_) => 2,
            })
        }
        Err(_) => ExitCode::from(2),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(CliError::Input)?,
        None => Config::default(),
    };
    let ctx = Ctx { cfg, precision: if cli.exact { Precision::Exact } else { Precision::default() } };
    let out = match cli.command {
        Command::Encode(a) => encode_cmd(&ctx, a)?,
        Command::Decode(a) => decode_cmd(&ctx, a)?,
        Command::Iou(a) => iou_cmd(&ctx, a)?,
        Command::Assign(a) => assign_cmd(&ctx, a)?,
        Command::Prune(a) => prune_cmd(&ctx, a)?,
        Command::Nms(a) => nms_cmd(&ctx, a)?,
        Command::Eval(a) => eval_cmd(&ctx, a)?,
        Command::Gen(a) => gen_cmd(a)?,
    };
    match cli.output {
        Some(path) => std::fs::write(&path, out).map_err(|e| input_err(path.display(), e)),
        None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn read_input(path: Option<&Path>) -> CliResult<(String, String)> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| input_err(p.display(), e))?;
            Ok((p.display().to_string(), text))
        }
    }
}

fn read_stdin() -> CliResult<(String, String)> {
    let mut text = String::new();
    std::io::stdin().read_to_string(&mut text).map_err(|e| input_err("<stdin>", e))?;
    Ok(("<stdin>".into(), text))
}

fn read_file(path: &Path) -> CliResult<(String, String)> {
    read_input(Some(path))
}

fn mode_of(ctx: &Ctx, flag: Option<&str>) -> CliResult<Mode> {
    let name = flag.or(ctx.cfg.mode.as_deref()).unwrap_or("mobius");
    name.parse().map_err(|e| input_err("--mode", e))
}

fn csv(flag: &str, s: &str, n: usize) -> CliResult<Vec<f64>> {
    let v = io::parse_csv(s).map_err(|_| input_err(flag, format!("'{s}' is not a list of numbers")))?;
    if v.len() != n {
        return Err(input_err(flag, format!("expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

fn location_arg(s: &str) -> CliResult<Location3> {
    let v = csv("--location", s, 3)?;
    Ok(Location3::new(v[0], v[1], v[2]))
}

fn box_arg(flag: &str, s: &str) -> CliResult<OrientedBox3> {
    let v = csv(flag, s, 7)?;
    OrientedBox3::from_array([v[0], v[1], v[2], v[3], v[4], v[5], v[6]]).map_err(|e| input_err(flag, e))
}

/// Non-comment lines as number vectors, tagged with their line number.
fn numeric_lines(src: &str, text: &str) -> CliResult<Vec<(usize, Vec<f64>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| input_err(format!("{src}: line {}", i + 1), "expected finite numbers"))?;
        out.push((i + 1, values));
    }
    Ok(out)
}

fn join(values: &[f64], precision: Precision) -> String {
    values.iter().map(|v| io::fmt_f64(*v, precision)).collect::<Vec<_>>().join(" ")
}

fn encode_cmd(ctx: &Ctx, a: EncodeArgs) -> CliResult<String> {
    let mode = mode_of(ctx, a.mode.as_deref())?;
    let loc = location_arg(&a.location)?;
    let boxes: Vec<(String, OrientedBox3)> = match &a.bbox {
        Some(s) => vec![("--box".into(), box_arg("--box", s)?)],
        None => {
            let (src, text) = read_input(a.input.as_deref())?;
            let mut boxes = Vec::new();
            for (line, v) in numeric_lines(&src, &text)? {
                let ctx = format!("{src}: line {line}");
                let arr: [f64; 7] = v.try_into().map_err(|_| input_err(&ctx, "box record needs 7 fields"))?;
                boxes.push((ctx.clone(), OrientedBox3::from_array(arr).map_err(|e| input_err(&ctx, e))?));
            }
            boxes
        }
    };
    let mut out = String::new();
    for (where_, b) in &boxes {
        let d = encode_obb(b, &loc, mode).map_err(|e| input_err(where_, e))?;
        writeln!(out, "{}", join(&d.values[..d.len()], ctx.precision)).unwrap();
    }
    Ok(out)
}

fn deltas_from(mode: Mode, v: &[f64], context: &str) -> CliResult<BoxDeltas> {
    let n = BoxDeltas { mode, values: [0.0; 8] }.len();
    if v.len() != n {
        return Err(input_err(context, format!("{mode} deltas need {n} values, found {}", v.len())));
    }
    let mut values = [0.0; 8];
    values[..n].copy_from_slice(v);
    Ok(BoxDeltas { mode, values })
}

fn decode_cmd(ctx: &Ctx, a: DecodeArgs) -> CliResult<String> {
    if let Some(path) = &a.targets {
        let (src, text) = read_file(path)?;
        let records = io::parse_targets(&text).map_err(|e| input_err(&src, e))?;
        let mut dets = Vec::with_capacity(records.len());
        for r in records {
            let bbox = decode_obb(&r.deltas, &r.location, r.deltas.mode).map_err(|e| input_err(&src, e))?;
            let score = if a.no_centerness { 1.0 } else { r.centerness };
            dets.push(DetRecord { scene: r.scene, det: Detection { class_label: r.class_label, score, bbox } });
        }
        return Ok(io::format_detections(&dets, ctx.precision));
    }
    let mode = mode_of(ctx, a.mode.as_deref())?;
    let loc = location_arg(
        a.location.as_deref().ok_or_else(|| CliError::Input("--location or --targets is required".into()))?,
    )?;
    let rows: Vec<(String, Vec<f64>)> = match &a.deltas {
        Some(s) => vec![("--deltas".into(), io::parse_csv(s).map_err(|_| input_err("--deltas", s))?)],
        None => {
            let (src, text) = read_input(a.input.as_deref())?;
            numeric_lines(&src, &text)?.into_iter().map(|(l, v)| (format!("{src}: line {l}"), v)).collect()
        }
    };
    let mut out = String::new();
    for (where_, v) in rows {
        let d = deltas_from(mode, &v, &where_)?;
        let b = decode_obb(&d, &loc, mode).map_err(|e| input_err(&where_, e))?;
        writeln!(out, "{}", io::format_box(&b, ctx.precision)).unwrap();
    }
    Ok(out)
}

fn as_aabb(b: &OrientedBox3, context: &str) -> CliResult<AxisAlignedBox3> {
    if b.theta != 0.0 {
        return Err(input_err(context, "box has theta != 0; pass --rotated"));
    }
    Ok(AxisAlignedBox3::new(b.x, b.y, b.z, b.w, b.l, b.h)?)
}

fn iou_cmd(ctx: &Ctx, a: IouArgs) -> CliResult<String> {
    let pairs: Vec<(String, OrientedBox3, OrientedBox3)> = match (&a.a, &a.b) {
        (Some(sa), Some(sb)) => vec![("--a/--b".into(), box_arg("--a", sa)?, box_arg("--b", sb)?)],
        _ => {
            let (src, text) = read_input(a.input.as_deref())?;
            let mut pairs = Vec::new();
            for (line, v) in numeric_lines(&src, &text)? {
                let c = format!("{src}: line {line}");
                if v.len() != 14 {
                    return Err(input_err(&c, format!("box pair needs 14 fields, found {}", v.len())));
                }
                let mk = |s: &[f64]| OrientedBox3::from_array([s[0], s[1], s[2], s[3], s[4], s[5], s[6]]);
                let ba = mk(&v[..7]).map_err(|e| input_err(&c, e))?;
                let bb = mk(&v[7..]).map_err(|e| input_err(&c, e))?;
                pairs.push((c, ba, bb));
            }
            pairs
        }
    };
    let mut out = String::new();
    for (c, ba, bb) in pairs {
        let v = if a.rotated { iou_obb(&ba, &bb) } else { iou_aabb(&as_aabb(&ba, &c)?, &as_aabb(&bb, &c)?) };
        writeln!(out, "{}", io::fmt_f64(v, ctx.precision)).unwrap();
    }
    Ok(out)
}

fn subsample(cloud: PointCloud, n_pts: usize, seed: u64) -> PointCloud {
    if cloud.len() <= n_pts {
        return cloud;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = rand::seq::index::sample(&mut rng, cloud.len(), n_pts).into_vec();
    keep.sort_unstable();
    PointCloud::new(keep.into_iter().map(|i| cloud.points[i]).collect())
}

fn assign_cmd(ctx: &Ctx, a: AssignArgs) -> CliResult<String> {
    let c = &ctx.cfg;
    let mode = mode_of(ctx, a.mode.as_deref())?;
    let spec = LevelSpec::new(
        a.voxel_size.or(c.voxel_size).unwrap_or(config::VOXEL_SIZE),
        a.levels.or(c.levels).unwrap_or(config::LEVELS),
        a.first_stride.or(c.first_stride).unwrap_or(config::FIRST_STRIDE),
    )?;
    let acfg = AssignmentConfig {
        n_loc: a.n_loc.or(c.n_loc).unwrap_or(config::N_LOC),
        center_sample_k: a.k.or(c.k).unwrap_or(config::CENTER_K),
    };
    acfg.validate()?;
    let n_pts = a.n_pts.or(c.n_pts).unwrap_or(config::N_PTS);
    if n_pts == 0 {
        return Err(CliError::Input("--n-pts must be positive".into()));
    }

    let (gt_src, gt_text) = read_file(&a.gt)?;
    let gts = io::by_scene(io::parse_gt(&gt_text).map_err(|e| input_err(&gt_src, e))?, |r| r.scene.as_str());

    let jobs: Vec<(String, PathBuf)> = match (&a.points, &a.points_dir) {
        (Some(p), _) => {
            let scene = match &a.scene {
                Some(s) => s.clone(),
                None if gts.len() == 1 => gts.keys().next().unwrap().clone(),
                None => {
                    return Err(input_err(&gt_src, format!("{} scenes present; pass --scene", gts.len())));
                }
            };
            vec![(scene, p.clone())]
        }
        (None, Some(dir)) => gts.keys().map(|s| (s.clone(), dir.join(format!("{s}.txt")))).collect(),
        (None, None) => return Err(CliError::Input("--points or --points-dir is required".into())),
    };

    let mut records = Vec::new();
    for (scene, path) in jobs {
        let (src, text) = read_file(&path)?;
        let cloud = io::parse_point_cloud(&text).map_err(|e| input_err(&src, e))?;
        let cloud = subsample(cloud, n_pts, a.seed);
        let scene_gts: Vec<GroundTruth> = gts.get(&scene).map(|v| v.iter().map(|r| r.gt).collect()).unwrap_or_default();
        let base = voxelize(&cloud, spec.base_voxel_size).map_err(|e| input_err(&src, e))?;
        let levels = (0..spec.num_levels).map(|l| level_locations(&base, &spec, l)).collect::<Result<Vec<_>, _>>()?;
        let targets = assign(&scene_gts, &levels, &acfg, mode).map_err(|e| input_err(&scene, e))?;
        let scene_records = TargetRecord::from_targets(&scene, &targets);
        check_targets(&scene_records, &scene_gts)?;
        records.extend(scene_records);
    }
    Ok(io::format_targets(&records, ctx.precision))
}

/// Every emitted target must decode back onto its box.
fn check_targets(records: &[TargetRecord], gts: &[GroundTruth]) -> CliResult<()> {
    for r in records {
        let gt = &gts[r.box_id].bbox;
        if r.deltas.mode == Mode::Mobius && (gt.w / gt.l).ln().abs() < 1e-6 {
            // Square footprints lose their heading under the Mobius embedding.
            continue;
        }
        let back = decode_obb(&r.deltas, &r.location, r.deltas.mode).map_err(|e| CliError::Internal(e.to_string()))?;
        let iou = iou_obb(&back, gt);
        if iou < 1.0 - 1e-9 {
            return Err(CliError::Internal(format!(
                "scene {} box {}: target at {:?} decodes with IoU {iou}",
                r.scene, r.box_id, r.voxel
            )));
        }
    }
    Ok(())
}

fn prune_cmd(ctx: &Ctx, a: PruneArgs) -> CliResult<String> {
    let n_vox = a.n_vox.or(ctx.cfg.n_vox).unwrap_or(config::N_VOX);
    let (src, text) = read_input(a.input.as_deref())?;
    let mut voxels = BTreeSet::new();
    let mut scores = BTreeMap::new();
    for (line, v) in numeric_lines(&src, &text)? {
        let c = format!("{src}: line {line}");
        if v.len() != 4 || v[..3].iter().any(|x| x.fract() != 0.0) {
            return Err(input_err(&c, "expected `ix iy iz score` with integer coordinates"));
        }
        let voxel = [v[0] as i64, v[1] as i64, v[2] as i64];
        if scores.insert(voxel, v[3]).is_some() {
            return Err(input_err(&c, format!("duplicate voxel {voxel:?}")));
        }
        voxels.insert(voxel);
    }
    let kept = prune_topk(&SparseVoxelSet::from_voxels(1.0, voxels).with_scores(scores.clone()), n_vox)?;
    let mut out = String::from("# ix iy iz score\n");
    for [x, y, z] in &kept.voxels {
        writeln!(out, "{x} {y} {z} {}", io::fmt_f64(scores[&[*x, *y, *z]], ctx.precision)).unwrap();
    }
    Ok(out)
}

fn nms_cmd(ctx: &Ctx, a: NmsArgs) -> CliResult<String> {
    let thr = a.iou_threshold.or(ctx.cfg.nms_iou).unwrap_or(config::NMS_IOU);
    let (src, text) = read_input(a.input.as_deref())?;
    let records = io::parse_detections(&text).map_err(|e| input_err(&src, e))?;
    let mut kept = Vec::new();
    for (scene, recs) in io::by_scene(records, |r| r.scene.as_str()) {
        let dets: Vec<Detection> = recs.iter().map(|r| r.det).collect();
        for i in nms_rotated_indices(&dets, thr)? {
            kept.push(DetRecord { scene: scene.clone(), det: dets[i] });
        }
    }
    Ok(io::format_detections(&kept, ctx.precision))
}

fn eval_cmd(ctx: &Ctx, a: EvalArgs) -> CliResult<String> {
    let thresholds = match (&a.thresholds, &ctx.cfg.thresholds) {
        (Some(s), _) => io::parse_csv(s).map_err(|_| input_err("--thresholds", s))?,
        (None, Some(t)) => t.clone(),
        (None, None) => sparsedet_core::eval::DEFAULT_THRESHOLDS.to_vec(),
    };
    let (gt_src, gt_text) = read_file(&a.gt)?;
    let gt_records: Vec<GtRecord> = io::parse_gt(&gt_text).map_err(|e| input_err(&gt_src, e))?;
    let (det_src, det_text) = read_file(&a.dets)?;
    let det_records: Vec<DetRecord> = io::parse_detections(&det_text).map_err(|e| input_err(&det_src, e))?;

    let rotated = !a.axis_aligned;
    if !rotated {
        for b in gt_records.iter().map(|r| &r.gt.bbox).chain(det_records.iter().map(|r| &r.det.bbox)) {
            as_aabb(b, "--axis-aligned")?;
        }
    }
    let num_classes = match a.num_classes {
        Some(n) => n,
        None => {
            let labels = gt_records.iter().map(|r| r.gt.class_label).chain(det_records.iter().map(|r| r.det.class_label));
            labels.max().map_or(0, |m| m + 1)
        }
    };

    let scenes: BTreeSet<String> =
        gt_records.iter().map(|r| r.scene.clone()).chain(det_records.iter().map(|r| r.scene.clone())).collect();
    let mut gts = io::by_scene(gt_records, |r| r.scene.as_str());
    let mut dets = io::by_scene(det_records, |r| r.scene.as_str());
    let mut gt_scenes = Vec::with_capacity(scenes.len());
    let mut det_scenes = Vec::with_capacity(scenes.len());
    for s in &scenes {
        gt_scenes.push(gts.remove(s).unwrap_or_default().into_iter().map(|r| r.gt).collect::<Vec<_>>());
        det_scenes.push(dets.remove(s).unwrap_or_default().into_iter().map(|r| r.det).collect::<Vec<_>>());
    }

    let report = evaluate(&det_scenes, &gt_scenes, &thresholds, rotated, num_classes)?;
    if let Some(dir) = &a.pr_dir {
        std::fs::create_dir_all(dir).map_err(|e| input_err(dir.display(), e))?;
        for c in 0..num_classes {
            for &t in &thresholds {
                let curve = class_pr_curve(&det_scenes, &gt_scenes, c, t, rotated);
                let path = dir.join(format!("pr_class{c}_iou{t}.txt"));
                std::fs::write(&path, io::format_pr_curve(&curve)).map_err(|e| input_err(path.display(), e))?;
            }
        }
    }
    Ok(io::format_report(&report))
}

/// Precision/recall points for one class pooled over all scenes.
fn class_pr_curve(
    dets: &[Vec<Detection>],
    gts: &[Vec<GroundTruth>],
    class: usize,
    threshold: f64,
    rotated: bool,
) -> Vec<(f64, f64)> {
    let mut scored = Vec::new();
    let mut n_gt = 0;
    for (d, g) in dets.iter().zip(gts) {
        let d: Vec<Detection> = d.iter().filter(|x| x.class_label == class).copied().collect();
        let g: Vec<GroundTruth> = g.iter().filter(|x| x.class_label == class).copied().collect();
        n_gt += g.len();
        let tp = match_detections(&d, &g, threshold, rotated);
        scored.extend(d.iter().zip(tp).map(|(x, t)| (x.score, t)));
    }
    let (scores, tp): (Vec<f64>, Vec<bool>) = scored.into_iter().unzip();
    pr_curve(&tp, &scores, n_gt)
}

fn gen_cmd(a: GenArgs) -> CliResult<String> {
    let spec = SceneSpec {
        num_classes: a.classes,
        num_boxes: a.boxes,
        points_per_box: a.points,
        clutter_points: a.clutter,
        rotated: !a.axis_aligned,
        ..SceneSpec::default()
    };
    std::fs::create_dir_all(&a.out).map_err(|e| input_err(a.out.display(), e))?;
    let precision = Precision::Exact;
    let mut gt_records = Vec::new();
    let mut listing = String::new();
    for i in 0..a.scenes {
        let scene_id = format!("scene_{i:04}");
        let scene = generate_scene(a.seed.wrapping_add(i as u64), &spec)?;
        let path = a.out.join(format!("{scene_id}.txt"));
        std::fs::write(&path, io::format_point_cloud(&scene.cloud, precision))
            .map_err(|e| input_err(path.display(), e))?;
        writeln!(listing, "{}", path.display()).unwrap();
        gt_records.extend(scene.gts.into_iter().map(|gt| GtRecord { scene: scene_id.clone(), gt }));
    }
    let gt_path = a.out.join("gt.txt");
    std::fs::write(&gt_path, io::format_gt(&gt_records, precision)).map_err(|e| input_err(gt_path.display(), e))?;
    writeln!(listing, "{}", gt_path.display()).unwrap();
    Ok(listing)
}
