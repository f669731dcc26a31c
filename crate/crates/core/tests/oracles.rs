use dualfractal::geometry::{hausdorff, Rect};
use dualfractal::job::{render, Mode, RenderJob};
use dualfractal::macro_fractal::{certify_default, cut_zoom, expand};
use dualfractal::micro::{iterate, DEFAULT_BUDGET};
use dualfractal::multifunc::MultiMap;
use dualfractal::presets::{all_presets, preset};
use dualfractal::verify::{preset_with_delta, Verifier};
use dualfractal::ErrorCategory;

#[test]
fn corrupted_constant_surfaces_as_certification_failure() {
    let presets = all_presets()
        .into_iter()
        .map(|p| {
            if p.name == "cross" {
                preset_with_delta("cross", Some(0.5)).unwrap()
            } else {
                p
            }
        })
        .collect();
    let outcome = Verifier::new().with_presets(presets).run(4);
    assert!(!outcome.passed);
    assert_eq!(outcome.category, Some(ErrorCategory::CertificationFailed));
    assert!(outcome.line().contains("certification-failed"));
}

#[test]
fn sidecar_bounds_survive_a_deeper_reference() {
    for name in ["cantor", "cross", "sierpinski-triangle", "koch"] {
        let p = preset(name).unwrap();
        let mut job = RenderJob::preset(name, Mode::Micro, "unused.ppm");
        job.epsilon = Some(0.05);
        let side = render(&job).unwrap().sidecar;
        let bound = side.micro_bound.unwrap();
        assert!(bound < 0.05);

        let fix = p.inverse.fixed_points().unwrap();
        let shallow = iterate(&p.inverse, &fix, side.depth, DEFAULT_BUDGET).unwrap();
        assert_eq!(shallow.points.len(), side.points);
        let deep = iterate(&p.inverse, &fix, side.depth + 3, DEFAULT_BUDGET).unwrap();
        let measured = hausdorff(&shallow.points.to_points(), &deep.points.to_points())
            .finite()
            .unwrap();
        assert!(
            measured <= bound + deep.bound,
            "{name}: {measured} > {bound} + {}",
            deep.bound
        );
    }
}

#[test]
fn cut_screen_is_complete_at_the_certified_depth() {
    for name in ["cross", "sierpinski-triangle", "snowflake6"] {
        let map = preset(name).unwrap().map.to_lattice().unwrap();
        let cert = certify_default(&map, DEFAULT_BUDGET).unwrap().certificate().unwrap();
        let screen = Rect::new(-12.0, 20.0, -15.0, 9.0).unwrap();
        let cut = cut_zoom(&map, &cert, screen, DEFAULT_BUDGET).unwrap();
        let deeper = expand(&map, cut.depth + 2, DEFAULT_BUDGET)
            .unwrap()
            .union()
            .filter(|p, _| screen.contains(p.to_point()));
        assert!(
            cut.points.same_points(&deeper),
            "{name}: depth {} misses points",
            cut.depth
        );
    }
}
