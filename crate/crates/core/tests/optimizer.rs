mod common;

use bodypath::optimizer::{
    curvature_cost, designate_turn_points, heading_changes, smoothness_cost, smoothness_gradients, spacing_cost,
    spacing_gradients,
};
use bodypath::terraingen::{generate, MapParams, Rect, StoneLayout, StoneShape, TerrainKind, TerrainSpec};
use bodypath::{BodyPath, Optimizer, OptimizerParams, Planner, PlannerParams, SearchStatus, Side, Terrain, Vec2};
use common::flat;
use proptest::prelude::*;

const H: f64 = 1e-7;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn central_difference(points: &[Vec2<f64>], i: usize, axis: usize, f: &dyn Fn(&[Vec2<f64>]) -> f64) -> f64 {
    let (mut a, mut b) = (points.to_vec(), points.to_vec());
    if axis == 0 {
        a[i].x += H;
        b[i].x -= H;
    } else {
        a[i].y += H;
        b[i].y -= H;
    }
    (f(&a) - f(&b)) / (2.0 * H)
}

fn random_path() -> impl Strategy<Value = Vec<Vec2<f64>>> {
    proptest::collection::vec((-0.08f64..0.08, -0.08f64..0.08), 10).prop_map(|d| {
        d.iter()
            .enumerate()
            .map(|(i, &(dx, dy))| Vec2::new(0.1 * i as f64 + dx, dy))
            .collect()
    })
}

fn near_deadband(points: &[Vec2<f64>], p: &OptimizerParams<f64>) -> bool {
    // a central difference straddling the kink is not a derivative
    let reach = 4.0 * H / 0.01;
    heading_changes(points)
        .iter()
        .any(|d| (d.abs() - p.curvature_deadband).abs() < 1e-4 + reach)
}

fn axis(v: Vec2<f64>, a: usize) -> f64 {
    if a == 0 {
        v.x
    } else {
        v.y
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spacing_gradient_matches_differences(points in random_path(), w in 0.1f64..5.0) {
        let g = spacing_gradients(&points, w);
        for (i, &gi) in g.iter().enumerate() {
            for a in 0..2 {
                let fd = central_difference(&points, i, a, &|q| spacing_cost(q, w));
                prop_assert!(rel_err(axis(gi, a), fd) <= 1e-5, "i {} {} vs {}", i, axis(gi, a), fd);
            }
        }
    }

    #[test]
    fn smoothness_gradient_matches_differences(points in random_path(), turn in proptest::option::of(1usize..9)) {
        let p = OptimizerParams::default();
        prop_assume!(!near_deadband(&points, &p));
        let mut path = BodyPath::new(points.clone());
        if let Some(t) = turn {
            path.turn_points[t] = true;
        }
        let flags = path.turn_points.clone();
        let cost = |q: &[Vec2<f64>]| {
            let mut b = BodyPath::new(q.to_vec());
            b.turn_points = flags.clone();
            smoothness_cost(&b, &p)
        };
        let g = smoothness_gradients(&path, &p);
        for (i, &gi) in g.iter().enumerate() {
            for a in 0..2 {
                let fd = central_difference(&points, i, a, &cost);
                prop_assert!(rel_err(axis(gi, a), fd) <= 1e-5, "i {} {} vs {}", i, axis(gi, a), fd);
            }
        }
    }

    #[test]
    fn endpoints_fixed_and_steps_capped(points in random_path()) {
        let m = flat(2.0, 0.0);
        let params = PlannerParams::default();
        let terrain = Terrain::new(&m, &params, 0);
        let opt = Optimizer::new(&terrain);
        let shifted: Vec<Vec2<f64>> = points.iter().map(|p| Vec2::new(p.x - 0.45, p.y)).collect();
        let path = BodyPath::new(shifted);
        let mut stepped = path.clone();
        opt.step(&mut stepped);
        for (a, b) in path.waypoints.iter().zip(&stepped.waypoints) {
            prop_assert!(a.distance(*b) <= params.optimizer.step_cap * (1.0 + 1e-12));
        }
        let out = opt.optimize(&path);
        prop_assert_eq!(out.waypoints[0].x.to_bits(), path.waypoints[0].x.to_bits());
        prop_assert_eq!(out.waypoints[0].y.to_bits(), path.waypoints[0].y.to_bits());
        let n = path.len() - 1;
        prop_assert_eq!(out.waypoints[n].x.to_bits(), path.waypoints[n].x.to_bits());
        prop_assert_eq!(out.waypoints[n].y.to_bits(), path.waypoints[n].y.to_bits());
        prop_assert!(!out.turn_points[0] && !out.turn_points[n]);
        // deterministic
        prop_assert_eq!(opt.optimize(&path), out);
    }

    #[test]
    fn deadband_leaves_only_spacing(d in proptest::collection::vec(-0.004f64..0.004, 10)) {
        let points: Vec<Vec2<f64>> = d.iter().enumerate().map(|(i, &dy)| Vec2::new(-0.45 + 0.1 * i as f64, dy)).collect();
        let p = OptimizerParams::default();
        prop_assume!(heading_changes(&points).iter().all(|x| x.abs() <= p.curvature_deadband));
        let m = flat(2.0, 0.0);
        let params = PlannerParams::default();
        let terrain = Terrain::new(&m, &params, 0);
        let opt = Optimizer::new(&terrain);
        let mut path = BodyPath::new(points.clone());
        let heights = opt.refresh_frames(&mut path);
        let g = opt.gradient(&path, &heights);
        let s = spacing_gradients(&points, p.spacing_weight);
        for i in 1..points.len() - 1 {
            prop_assert_eq!(g[i], s[i]);
        }
    }
}

#[test]
fn turn_point_term_is_dropped() {
    let p = OptimizerParams::default();
    let pts: Vec<Vec2<f64>> = [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 0.5), (1.0, 1.0)]
        .iter()
        .map(|&(x, y)| Vec2::new(x, y))
        .collect();
    let path = designate_turn_points(&BodyPath::new(pts.clone()), &p);
    assert_eq!(path.turn_point_indices(), vec![2]);
    assert_eq!(smoothness_cost(&path, &p), 0.0);
    assert!(smoothness_gradients(&path, &p).iter().all(|g| *g == Vec2::zero()));
    let plain = BodyPath::new(pts);
    assert!((smoothness_cost(&plain, &p) - curvature_cost(std::f64::consts::FRAC_PI_2, &p)).abs() < 1e-12);
}

#[test]
fn zigzag_on_flat_ground_smooths() {
    let m = flat(3.0, 0.0);
    let params = PlannerParams::default();
    let terrain = Terrain::new(&m, &params, 0);
    let points: Vec<Vec2<f64>> = (0..21)
        .map(|i| Vec2::new(-1.0 + 0.1 * i as f64, if i % 2 == 1 { 0.04 } else { 0.0 }))
        .collect();
    let path = BodyPath::new(points.clone());
    let (out, _) = Optimizer::new(&terrain).optimize_with_stats(&path);
    let w = params.optimizer.spacing_weight;
    assert!(spacing_cost(&out.waypoints, w) < spacing_cost(&points, w));
    let turns = heading_changes(&out.waypoints);
    let worst = (0..out.len())
        .filter(|&i| !out.turn_points[i])
        .map(|i| turns[i].abs())
        .fold(0.0, f64::max);
    assert!(
        worst <= params.optimizer.curvature_deadband + 0.05,
        "max heading change {worst}"
    );
}

fn stones() -> bodypath::HeightMap<f64> {
    let spec = TerrainSpec::new(TerrainKind::SteppingStones {
        stone_radius: 0.3,
        pitch: 0.66,
        layout: StoneLayout::Grid,
        shape: StoneShape::Square,
        x_from: -1.0,
        x_to: 1.0,
        y_offset: 0.0,
        height: 0.0,
    });
    generate(&spec, &MapParams::default()).unwrap()
}

#[test]
fn traversability_step_seeks_better_footholds() {
    let m = stones();
    let params = PlannerParams::default();
    let terrain = Terrain::new(&m, &params, 0);
    let opt = Optimizer::new(&terrain);
    // straight line along a stone row: the footholds at +-0.25 straddle the
    // stone edges at +-0.3, leaving the sides short of support
    let points: Vec<Vec2<f64>> = (0..7).map(|i| Vec2::new(-0.69 + 0.06 * i as f64, 0.1)).collect();
    let mut path = BodyPath::new(points);
    opt.refresh_frames(&mut path);
    let i = 3;
    let g = opt.traversability_gradient(&path, i);
    assert!(g.norm() > 0.0);
    // brute force: scan lateral offsets and find the best foothold score
    let region = params.region_spec();
    let best_side = |y: f64| {
        let f = bodypath::Frame::new(Vec2::new(path.waypoints[i].x, y).lift(0.0), Vec2::new(1.0, 0.0));
        Side::BOTH
            .map(|s| terrain.score_region(&f, s, &region, 0.0, 0.0))
            .into_iter()
            .fold(0.0, f64::max)
    };
    let here = best_side(0.1);
    let moved = best_side(0.1 - g.y.signum() * 0.02);
    assert!(moved >= here, "descent direction lowers the score: {here} -> {moved}");
}

#[test]
fn preview_veto_zeroes_gradient() {
    let m = stones();
    let params = PlannerParams::default();
    let terrain = Terrain::new(&m, &params, 0);
    let opt = Optimizer::new(&terrain);
    // waypoint 1 is deficient on both sides, waypoint 0 sits on solid floor
    let points = vec![
        Vec2::new(-1.35, 0.33),
        Vec2::new(-1.11, 0.33),
        Vec2::new(-0.87, 0.33),
        Vec2::new(-0.63, 0.33),
    ];
    let mut path = BodyPath::new(points);
    opt.refresh_frames(&mut path);
    let d = opt.diagnostics(&path);
    assert_eq!(d[0].best_foothold, 1.0);
    assert_eq!(opt.traversability_gradient(&path, 1), Vec2::zero());
}

#[test]
fn contour_term_on_ramp() {
    let spec = TerrainSpec::new(TerrainKind::Ramp {
        incline_deg: 15.0,
        from_x: None,
        to_x: None,
    });
    let m = generate(
        &spec,
        &MapParams {
            width: 2.0,
            ..Default::default()
        },
    )
    .unwrap();
    let params = PlannerParams::default();
    let terrain = Terrain::new(&m, &params, 0);
    let opt = Optimizer::new(&terrain);

    let straight = BodyPath::new(vec![Vec2::new(-0.2, 0.0), Vec2::new(0.0, 0.0), Vec2::new(0.2, 0.0)]);
    let mut s = straight.clone();
    let h = opt.refresh_frames(&mut s);
    let (a, b) = opt.contour_gradient(&s, 1, &h);
    assert!(a.norm() < 1e-9 && b.norm() < 1e-9);

    // thirty degrees off the fall line
    let (c, s30) = (0.15 * 30f64.to_radians().cos(), 0.15 * 30f64.to_radians().sin());
    let diagonal = BodyPath::new(vec![Vec2::new(-c, -s30), Vec2::new(0.0, 0.0), Vec2::new(c, s30)]);
    let mut d = diagonal.clone();
    let h = opt.refresh_frames(&mut d);
    let (prev, next) = opt.contour_gradient(&d, 1, &h);
    assert!((prev + next).norm() < 1e-12);
    let before = opt.diagnostics(&d)[1].contour_alignment;
    let mut moved = d.clone();
    let gamma = params.optimizer.gain;
    moved.waypoints[0] -= prev * gamma;
    moved.waypoints[2] -= next * gamma;
    let after = opt.diagnostics(&moved)[1].contour_alignment;
    assert!(after < before, "{before} -> {after}");
}

#[test]
fn obstacle_step_reduces_overlap() {
    let spec = TerrainSpec::new(TerrainKind::WallObstacles {
        walls: vec![Rect {
            x_min: -0.3,
            x_max: 0.3,
            y_min: 0.2,
            y_max: 0.5,
        }],
        height: 1.0,
    });
    let m = generate(
        &spec,
        &MapParams {
            width: 2.0,
            ..Default::default()
        },
    )
    .unwrap();
    let params = PlannerParams::default();
    let terrain = Terrain::new(&m, &params, 0);
    let opt = Optimizer::new(&terrain);
    let overlap = |path: &BodyPath<f64>| {
        let f = &path.frames[1];
        let cells: Vec<f64> = m
            .cells_in_rect(f, Vec2::zero(), params.box_length, params.box_width)
            .filter(|&(ix, iy)| m.surface_height(ix, iy).is_some_and(|z| z > params.box_offset))
            .map(|(ix, iy)| params.box_width / 2.0 - f.to_local(m.cell_center(ix, iy)).y.abs())
            .collect();
        cells.iter().map(|o| o * o).sum::<f64>() / cells.len().max(1) as f64
    };
    let mut path = BodyPath::new(vec![Vec2::new(-0.2, 0.0), Vec2::new(0.0, 0.0), Vec2::new(0.2, 0.0)]);
    let h = opt.refresh_frames(&mut path);
    let g = opt.obstacle_gradient(&path, 1, h[1]);
    assert!(g.y > 0.0);
    let before = overlap(&path);
    path.waypoints[1] -= g * (params.optimizer.step_cap / g.norm());
    opt.refresh_frames(&mut path);
    assert!(overlap(&path) < before);
}

#[test]
fn f32_pipeline_runs() {
    let mut m = bodypath::HeightMapF32::new(Vec2::zero(), 0.02, 2.0).unwrap();
    for iy in 0..m.side_cells() {
        for ix in 0..m.side_cells() {
            m.set_height(ix, iy, 0.0);
        }
    }
    let params = bodypath::PlannerParamsF32::default();
    let planner = Planner::new(&m, &params, 0).unwrap();
    let r = planner.plan(Vec2::new(-0.6, 0.0), Vec2::new(0.6, 0.3)).unwrap();
    assert_eq!(r.status, SearchStatus::Reached);
    let out = Optimizer::new(planner.terrain()).optimize(&BodyPath::new(r.path.clone()));
    assert_eq!(out.waypoints.first(), r.path.first());
    assert_eq!(out.waypoints.last(), r.path.last());
    assert!(out.waypoints.iter().all(|w| w.x.is_finite() && w.y.is_finite()));
}
