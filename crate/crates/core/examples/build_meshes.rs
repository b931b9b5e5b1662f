//! Builds every body kind with the default configuration and prints its
//! particle, spring and face counts. Pass `--json` to dump the level-1
//! octahedron sphere as a mesh export instead.

use squish::engine::{BodySpec, SimConfig};
use squish::export::MeshExport;
use squish::mesh::{build_sphere_octa, SpringGroup};

fn main() -> squish::Result<()> {
    let cfg = SimConfig::default();

    if std::env::args().any(|a| a == "--json") {
        let body = BodySpec::sphere_octa(1, 1.5, 2.0).build(&cfg)?;
        println!("{}", serde_json::to_string_pretty(&MeshExport::from_body(&body))?);
        return Ok(());
    }

    println!("subdivision of the unit octahedron:");
    for level in 0..=4 {
        let m = build_sphere_octa(level, 1.0)?;
        println!(
            "  level {level}: {:5} vertices {:5} edges {:5} faces, V - E + F = {}",
            m.points.len(),
            m.edges.len(),
            m.faces.len(),
            m.euler_characteristic()
        );
    }

    println!("\ntwo-layer bodies:");
    let specs = [
        BodySpec::one_d([0.0, 2.0], [0.0, 1.0]),
        BodySpec::ring2d(12, 1.5, 2.0),
        BodySpec::sphere_polar(10, 10, 1.5, 2.0),
        BodySpec::sphere_octa(1, 1.5, 2.0),
        BodySpec::sphere_octa(2, 1.5, 2.0),
    ];
    for spec in specs {
        let body = spec.build(&cfg)?;
        let count = |g| body.springs(g).len();
        println!(
            "  {:12} {:4} particles | structural {:3}+{:3} radius {:3} shear {:3}+{:3} | faces {}",
            spec.kind(),
            body.len(),
            count(SpringGroup::Inner),
            count(SpringGroup::Outer),
            count(SpringGroup::Radius),
            count(SpringGroup::ShearLeft),
            count(SpringGroup::ShearRight),
            body.inner_faces().len() + body.outer_faces().len(),
        );
    }
    Ok(())
}
