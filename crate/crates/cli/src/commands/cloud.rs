use std::collections::BTreeMap;

use det3d_core::augment::{build_object_db, paste_objects};
use det3d_core::pointcloud::voxelize as voxelize_cloud;
use det3d_core::{io, pcf, PointCloud64};
use serde::Serialize;

use super::{group_by_frame, per_frame, read_ground_truths};
use crate::args::{GtpasteApplyArgs, GtpasteBuildArgs, VoxelizeArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunContext;

#[derive(Serialize)]
struct VoxelSummary {
    points: usize,
    points_in_range: usize,
    dims: [usize; 3],
    cells: usize,
    occupancy: f64,
}

#[derive(Serialize)]
struct CellRecord<'a> {
    index: [usize; 3],
    count: usize,
    mean: &'a [f64],
}

fn read_cloud(ctx: &mut RunContext, path: &std::path::Path) -> CliResult<PointCloud64> {
    let bytes = ctx.read_input(path)?;
    pcf::decode(&bytes).map_err(|e| CliError::input(path, e))
}

pub fn voxelize(ctx: &mut RunContext, args: &VoxelizeArgs) -> CliResult<()> {
    let spec = ctx.config.voxel_spec()?;
    let cloud = read_cloud(ctx, &args.input)?;
    let grid = voxelize_cloud(&cloud, &spec);
    if let Some(path) = &args.cells {
        let mut buf = Vec::new();
        io::write_jsonl(
            &mut buf,
            grid.cells.iter().map(|(idx, c)| CellRecord {
                index: *idx,
                count: c.point_count,
                mean: &c.mean,
            }),
        )
        .expect("writing to memory");
        ctx.write_file(path, &buf)?;
    }
    let summary = VoxelSummary {
        points: cloud.len(),
        points_in_range: grid.total_points(),
        dims: spec.dims(),
        cells: grid.len(),
        occupancy: grid.occupancy(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    ctx.write_main(text.as_bytes())
}

pub fn gtpaste_build(ctx: &mut RunContext, args: &GtpasteBuildArgs) -> CliResult<()> {
    let mut gts = group_by_frame(read_ground_truths(ctx, &args.gts)?);
    let entries = std::fs::read_dir(&args.clouds).map_err(|e| CliError::io(&args.clouds, e))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pcf"))
        .collect();
    paths.sort();

    let mut frames = BTreeMap::new();
    for path in paths {
        let frame = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let cloud = read_cloud(ctx, &path)?;
        frames.insert(frame.clone(), (cloud, gts.remove(&frame).unwrap_or_default()));
    }
    for frame in gts.keys() {
        log::warn!("no cloud for annotated frame {frame}; skipped");
    }
    let per = per_frame(ctx, &frames, |(cloud, g)| {
        Ok(build_object_db(&[(cloud.clone(), g.clone())]))
    })?;
    let db: Vec<_> = per.into_iter().flat_map(|(_, e)| e).collect();
    log::info!("object database: {} entries from {} frames", db.len(), frames.len());

    let mut buf = Vec::new();
    io::write_object_db(&mut buf, &db).expect("writing to memory");
    ctx.write_main(&buf)
}

pub fn gtpaste_apply(ctx: &mut RunContext, args: &GtpasteApplyArgs) -> CliResult<()> {
    if ctx.output.is_none() {
        return Err(CliError::Usage(
            "gtpaste-apply writes a binary cloud and needs --output".into(),
        ));
    }
    let schedule = ctx.config.fading_schedule()?;
    let options = ctx.config.paste_options();
    let db_bytes = ctx.read_input(&args.db)?;
    let db = io::read_object_db(db_bytes.as_slice()).map_err(|e| CliError::input(&args.db, e))?;
    let cloud = read_cloud(ctx, &args.cloud)?;
    let frame = args
        .cloud
        .file_stem()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned();
    let scene_gts: Vec<_> = read_ground_truths(ctx, &args.gts)?
        .into_iter()
        .filter(|(f, _)| *f == frame)
        .map(|(_, g)| g)
        .collect();

    let (out_cloud, out_gts) = paste_objects(
        (&cloud, &scene_gts),
        &db,
        &options,
        args.epoch,
        &schedule,
        ctx.config.seed,
    )
    .map_err(CliError::from_core)?;
    log::info!(
        "epoch {}: pasted {} objects into {frame}",
        args.epoch,
        out_gts.len() - scene_gts.len()
    );

    let mut buf = Vec::new();
    io::write_ground_truths(&mut buf, out_gts.iter().map(|g| (frame.as_str(), g))).expect("writing to memory");
    ctx.write_file(&args.output_gts, &buf)?;
    ctx.write_main(&pcf::encode(&out_cloud))
}
