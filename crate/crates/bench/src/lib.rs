//! Shapes shared by the benchmarks.

use isocap::{Shape, ShapeSpec};

pub fn unit_cube() -> Shape {
    Shape::new(ShapeSpec::cuboid(&[0.5, 0.5, 0.5])).expect("valid cube")
}

pub fn ellipsoid_211() -> Shape {
    Shape::new(ShapeSpec::ellipsoid(&[2.0, 1.0, 1.0])).expect("valid ellipsoid")
}

pub fn polytope(seed: u64) -> Shape {
    let e = isocap::corpus::polytopes(seed).remove(0);
    Shape::new(e.spec).expect("valid polytope")
}
