use cylpatch::dynamics::{remesh, run, step, FlowState, RunConfig};
use cylpatch::expcli::velocity_gap_probe;
use cylpatch::kernel::{velocity_from_contours, velocity_from_grid, CoverPoint, GridQuadrature};
use cylpatch::patchgeom::{make_rectangle, strip_sym_diff};
use cylpatch::rearrange::GridField;

#[test]
fn wall_point_of_rectangle_moves_up_at_nearly_unit_speed() {
    let patch = make_rectangle(0.05, 0.02, 512).unwrap();
    let origin = CoverPoint::new(0.0, 0.0);
    assert_eq!(patch.tracer(), Some(origin));
    let u = velocity_from_contours(&patch, origin).unwrap();
    assert!(u.u1.abs() <= 1e-12, "{u:?}");
    // close to the strip's unit wall speed; slightly above, since the outer
    // side sits just beyond x1 = 1
    assert!((u.u2 - 1.0).abs() <= 0.05, "{u:?}");

    let field = GridField::from_patch(&patch, 1024, 1024, 2.0, 4).unwrap();
    let g = velocity_from_grid(&field, origin, GridQuadrature::default()).unwrap();
    assert!((g.u2 - u.u2).abs() <= 2e-3, "grid {g:?} vs contours {u:?}");

    let dt = 0.01;
    let next = step(&FlowState::new(patch), dt).unwrap();
    let moved = next.patch.tracer().unwrap();
    assert!(moved.x1.abs() <= 1e-12);
    assert!((moved.x2 / dt - u.u2).abs() <= 1e-3, "{moved:?}");
}

#[test]
fn velocity_gap_shrinks_with_the_slit() {
    let gaps: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&h| {
            let p = make_rectangle(h, h / 2.5, 512).unwrap();
            let delta = strip_sym_diff(&p).unwrap().area;
            velocity_gap_probe(&p, 400, delta).unwrap().gap
        })
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] <= 0.5);
}

/// The rectangle transported by the affine shear `(0, 1 - x1)`, remeshed
/// after every increment: the remesh must not change the perimeter, the
/// perimeter grows linearly, and the marker count keeps pace with it.
#[test]
fn remesh_tracks_an_analytic_shear() {
    let patch = make_rectangle(0.1, 0.04, 1024).unwrap();
    let spacing = RunConfig {
        nodes0: 1024,
        ..RunConfig::default()
    }
    .spacing(&patch);
    let mut state = FlowState::new(patch);
    let dt = 0.1;
    let mut perimeters = Vec::new();
    for k in 1..=100 {
        for c in &mut state.patch.contours {
            for m in &mut c.markers {
                m.x2 += (1.0 - m.x1) * dt;
            }
        }
        state.t = k as f64 * dt;
        let before = state.patch.perimeter();
        state = remesh(&state, spacing).unwrap();
        let after = state.patch.perimeter();
        assert!(
            (after - before).abs() <= 1e-4 * before,
            "t = {}: {before} -> {after}",
            state.t
        );
        let n = state.patch.marker_count() as f64;
        assert!(
            n >= after / spacing.dmax && n <= 32.0 * after / spacing.dmax,
            "t = {}: {n}",
            state.t
        );
        if k % 20 == 0 {
            perimeters.push(after);
        }
    }
    // the slit sides stretch at a constant rate once they lie nearly flat
    let inc: Vec<f64> = perimeters.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = inc.iter().sum::<f64>() / inc.len() as f64;
    assert!(mean > 0.0);
    assert!(
        inc.iter().all(|d| (d - mean).abs() <= 0.05 * mean),
        "{perimeters:?}"
    );
}

/// Halving both the step and the spacing moves `perimeter(T)` by under 1%.
#[test]
fn perimeter_converges_under_refinement() {
    let perimeter = |dt: f64, nodes0: usize| {
        let cfg = RunConfig {
            dt,
            t_end: 4.0,
            nodes0,
            output_every: 1000,
            ..RunConfig::default()
        };
        let p = make_rectangle(0.1, 0.04, nodes0).unwrap();
        let spacing = cfg.spacing(&p);
        let end = run(&cfg, FlowState::new(p), spacing, &mut |_| Ok(())).unwrap();
        assert!(end.patch.tracer().unwrap().x1.abs() <= 1e-6);
        end.patch.perimeter()
    };
    let coarse = perimeter(0.1, 256);
    let fine = perimeter(0.05, 512);
    assert!((coarse - fine).abs() <= 0.01 * fine, "{coarse} vs {fine}");
}
