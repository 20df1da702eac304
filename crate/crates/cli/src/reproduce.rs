//! Worked examples bundled with the library, rerun end to end.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use expsum::contour::Source;
use expsum::zeroset::{count_components_2d, ExpSum, DEFAULT_GRID};
use expsum::{chambers, fixtures, locate, BoxRegion, ContourSampler, SignVector};
use serde_json::json;

use crate::commands::{clipped, core_err};
use crate::manifest::Run;
use crate::{Case, Failure, Global};

const CONTOUR_RESOLUTION: usize = 2000;
const CENSUS_RESOLUTION: usize = 10_000;
/// Coarsest raster side; the smallest pentagon chamber needs about 800 cells
/// across `[-4, 4]`.
const GRID: usize = 800;

/// `+--++` -> `pmmpp`, for file names.
fn file_tag(sigma: &SignVector) -> String {
    sigma
        .as_slice()
        .iter()
        .map(|&s| if s > 0 { 'p' } else { 'm' })
        .collect()
}

pub fn run(global: &Global, case: Case) -> Result<(), Failure> {
    let dir = global.out_dir.clone().unwrap_or_else(|| PathBuf::from(case.name()));
    let mut run = Run::in_dir(global, &format!("reproduce {}", case.name()), None, Some(dir));
    run.param("contour_resolution", CONTOUR_RESOLUTION);
    run.param("grid", GRID);
    match case {
        Case::Pentagon => pentagon(&mut run, global.seed)?,
        Case::Parallelogram => parallelogram(&mut run, global.seed)?,
        Case::Circles => circles(&mut run, global.seed)?,
    }
    run.finish()
}

fn pentagon(run: &mut Run, seed: u64) -> Result<(), Failure> {
    let spec = fixtures::pentagon();
    let basis = spec.null_basis().map_err(core_err)?;
    let bbox = BoxRegion::square(4.0).map_err(core_err)?;
    run.write(Path::new("pentagon.txt"), fixtures::PENTAGON_TXT)?;

    let nonempty: BTreeSet<SignVector> = ContourSampler::new(CENSUS_RESOLUTION)
        .seed(seed)
        .nonempty_classes(&basis)
        .into_iter()
        .collect();
    let total = SignVector::all(spec.len()).len();
    run.say(format!("{} of {total} sign classes have an empty contour", total - nonempty.len()));
    run.check(
        total == 16 && nonempty.len() == 5,
        format!("expected 11 of 16 empty sign classes, found {}", total - nonempty.len()),
    );

    let sampler = ContourSampler::new(CONTOUR_RESOLUTION).seed(seed).box_radius(4.0);
    let mut summaries = Vec::new();
    let mut counts = Vec::new();
    for s in fixtures::PENTAGON_CLASS_ORDER {
        let sigma: SignVector = s.parse().map_err(core_err)?;
        run.check(nonempty.contains(&sigma), format!("{s} should have a nonempty contour"));
        let cloud = sampler.completed(&spec, &basis, &sigma).map_err(core_err)?;
        let map = chambers(&cloud, bbox, GRID).map_err(core_err)?;
        run.write(
            Path::new(&format!("contour_{}.csv", file_tag(&sigma))),
            &clipped(cloud, bbox).to_csv(),
        )?;
        run.check(map.stable, format!("{s}: chamber count not stable"));
        run.check(
            (map.inner_count() > 0) == (s == "+--++"),
            format!("{s}: {} inner chambers", map.inner_count()),
        );
        run.say(format!("{s}: {} chambers, {} inner", map.count(), map.inner_count()));
        counts.push(map.count());
        summaries.push(map.summary());
    }
    run.check(counts == [2, 2, 3, 2, 2], format!("chamber counts {counts:?}, expected [2, 2, 3, 2, 2]"));
    run.write_json(
        Path::new("chambers.json"),
        &json!({ "schema_version": "1", "order": fixtures::PENTAGON_CLASS_ORDER, "maps": summaries }),
    )?;
    Ok(())
}

fn parallelogram(run: &mut Run, seed: u64) -> Result<(), Failure> {
    let spec = fixtures::parallelogram();
    let basis = spec.null_basis().map_err(core_err)?;
    let bbox = BoxRegion::square(4.0).map_err(core_err)?;
    run.write(Path::new("parallelogram.txt"), fixtures::PARALLELOGRAM_TXT)?;

    let faces = spec.non_simplicial_faces().map_err(core_err)?;
    let mut normals: Vec<[i64; 2]> = faces
        .iter()
        .map(|f| [f.normal[0].round() as i64, f.normal[1].round() as i64])
        .collect();
    normals.sort();
    run.say(format!("non-simplicial facets with normals {normals:?}"));
    run.check(
        normals == [[-1, 0], [0, -1]],
        format!("expected facets with normals (-1,0) and (0,-1), found {normals:?}"),
    );

    let cloud = ContourSampler::new(CONTOUR_RESOLUTION)
        .seed(seed)
        .box_radius(4.0)
        .completed_all(&spec, &basis)
        .map_err(core_err)?;
    let fibers: Vec<String> = cloud
        .sources()
        .into_iter()
        .filter(|s| *s != Source::Main)
        .map(|s| s.to_string())
        .collect();
    run.say(format!("completed contour adds {} line fibers", fibers.len()));
    run.check(fibers.len() == 2, format!("expected 2 line fibers, found {}", fibers.len()));

    let classes = basis.projective_row_classes().map_err(core_err)?;
    run.say(format!("{} projective classes of null-basis rows", classes.len()));
    run.check(
        classes.len() == spec.n() + 1,
        format!("expected {} projective row classes, found {}", spec.n() + 1, classes.len()),
    );

    run.write(Path::new("contour_completed.csv"), &clipped(cloud, bbox).to_csv())?;
    run.write_json(
        Path::new("structure.json"),
        &json!({
            "schema_version": "1",
            "facet_normals": normals,
            "fibers": fibers,
            "projective_classes": classes,
        }),
    )?;
    Ok(())
}

fn circles(run: &mut Run, seed: u64) -> Result<(), Failure> {
    let spec = fixtures::parallelogram();
    let basis = spec.null_basis().map_err(core_err)?;
    let bbox = BoxRegion::square(4.0).map_err(core_err)?;
    let g1 = fixtures::circles_g1();
    let g2 = fixtures::circles_g2();
    run.write(Path::new("g1.txt"), fixtures::CIRCLES_G1_TXT)?;
    run.write(Path::new("g2.txt"), fixtures::CIRCLES_G2_TXT)?;

    let n1 = count_components_2d(&ExpSum::new(spec.clone(), g1.clone()).map_err(core_err)?, DEFAULT_GRID, 4.0)
        .map_err(core_err)?;
    let n2 = count_components_2d(&ExpSum::new(spec.clone(), g2.clone()).map_err(core_err)?, DEFAULT_GRID, 4.0)
        .map_err(core_err)?;
    run.say(format!("N(g1) = {}, N(g2) = {}", n1.count, n2.count));
    run.check(n1.stabilized && n2.stabilized, "component counts did not stabilize");
    run.check(n1.count == 1, format!("N(g1) = {}, expected 1", n1.count));
    run.check(n2.count == 0, format!("N(g2) = {}, expected 0", n2.count));

    let sigma = SignVector::of_values(&g1).map_err(core_err)?;
    let cloud = ContourSampler::new(CONTOUR_RESOLUTION)
        .seed(seed)
        .box_radius(4.0)
        .completed(&spec, &basis, &sigma)
        .map_err(core_err)?;
    let map = chambers(&cloud, bbox, GRID).map_err(core_err)?;
    let l1 = locate(&spec, &basis, &g1, &map).map_err(core_err)?;
    let l2 = locate(&spec, &basis, &g2, &map).map_err(core_err)?;
    run.say(format!("g1 in chamber {}, g2 in chamber {}", l1.chamber, l2.chamber));
    run.check(l1.chamber != l2.chamber, "g1 and g2 lie in the same chamber");

    run.write(
        Path::new(&format!("contour_{}.csv", file_tag(&sigma))),
        &clipped(cloud, bbox).to_csv(),
    )?;
    run.write_json(
        Path::new("circles.json"),
        &json!({
            "schema_version": "1",
            "components": { "g1": n1, "g2": n2 },
            "locations": { "g1": l1, "g2": l2 },
            "chambers": map.summary(),
        }),
    )?;
    Ok(())
}
