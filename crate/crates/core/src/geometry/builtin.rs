use std::str::FromStr;

use super::{Domain, GeometryError, HalfSpace, PolyhedralCone, Polyhedron, Vec3, WedgeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlatonicSolid {
    Tetrahedron,
    Cube,
    Octahedron,
    Dodecahedron,
    Icosahedron,
}

impl PlatonicSolid {
    pub const ALL: [PlatonicSolid; 5] = [
        PlatonicSolid::Tetrahedron,
        PlatonicSolid::Cube,
        PlatonicSolid::Octahedron,
        PlatonicSolid::Dodecahedron,
        PlatonicSolid::Icosahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlatonicSolid::Tetrahedron => "tetrahedron",
            PlatonicSolid::Cube => "cube",
            PlatonicSolid::Octahedron => "octahedron",
            PlatonicSolid::Dodecahedron => "dodecahedron",
            PlatonicSolid::Icosahedron => "icosahedron",
        }
    }
}

impl FromStr for PlatonicSolid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlatonicSolid::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown Platonic solid '{s}'"))
    }
}

fn vertices_of(solid: PlatonicSolid) -> Vec<Vec3> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v = Vec::new();
    match solid {
        PlatonicSolid::Tetrahedron => {
            v.push(Vec3::new(1.0, 1.0, 1.0));
            v.push(Vec3::new(1.0, -1.0, -1.0));
            v.push(Vec3::new(-1.0, 1.0, -1.0));
            v.push(Vec3::new(-1.0, -1.0, 1.0));
        }
        PlatonicSolid::Cube => {
            for z in [0.0, 1.0] {
                for y in [0.0, 1.0] {
                    for x in [0.0, 1.0] {
                        v.push(Vec3::new(x, y, z));
                    }
                }
            }
        }
        PlatonicSolid::Octahedron => {
            for s in [1.0, -1.0] {
                v.push(Vec3::new(s, 0.0, 0.0));
                v.push(Vec3::new(0.0, s, 0.0));
                v.push(Vec3::new(0.0, 0.0, s));
            }
        }
        PlatonicSolid::Dodecahedron => {
            for x in [-1.0, 1.0] {
                for y in [-1.0, 1.0] {
                    for z in [-1.0, 1.0] {
                        v.push(Vec3::new(x, y, z));
                    }
                }
            }
            for a in [-1.0, 1.0] {
                for b in [-1.0, 1.0] {
                    v.push(Vec3::new(0.0, a / phi, b * phi));
                    v.push(Vec3::new(a / phi, b * phi, 0.0));
                    v.push(Vec3::new(a * phi, 0.0, b / phi));
                }
            }
        }
        PlatonicSolid::Icosahedron => {
            for a in [-1.0, 1.0] {
                for b in [-1.0, 1.0] {
                    v.push(Vec3::new(0.0, a, b * phi));
                    v.push(Vec3::new(a, b * phi, 0.0));
                    v.push(Vec3::new(a * phi, 0.0, b));
                }
            }
        }
    }
    v
}

/// The Platonic solid as an explicit polyhedron (cube: `[0, 1]^3`).
pub fn platonic_solid(solid: PlatonicSolid) -> Polyhedron {
    Polyhedron::convex_hull(vertices_of(solid)).expect("Platonic solids are valid convex polyhedra")
}

/// The box `[0, a] × [0, b] × [0, c]`.
pub fn unit_box(a: f64, b: f64, c: f64) -> Polyhedron {
    let mut v = Vec::new();
    for z in [0.0, c] {
        for y in [0.0, b] {
            for x in [0.0, a] {
                v.push(Vec3::new(x, y, z));
            }
        }
    }
    Polyhedron::convex_hull(v).expect("a box with positive sides is a valid polyhedron")
}

fn parse_args(name: &str, args: &str, count: usize) -> Result<Vec<f64>, GeometryError> {
    let vals: Result<Vec<f64>, _> = args.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| GeometryError::Spec(format!("{name}: bad argument list '{args}': {e}")))?;
    if vals.len() != count {
        return Err(GeometryError::Spec(format!(
            "{name} takes {count} argument(s), got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

/// Named domains: `octant`, `cube`, the other Platonic solids,
/// `quarter_space_wedge(kappa)`, `box(a,b,c)`, `half_space`, `free`,
/// `octant_complement`.
pub fn builtin_domain(name: &str) -> Result<Domain, GeometryError> {
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(p) if name.ends_with(')') => (&name[..p], Some(&name[p + 1..name.len() - 1])),
        Some(_) => return Err(GeometryError::Spec(format!("malformed builtin '{name}'"))),
        None => (name, None),
    };
    let no_args = |d: Domain| -> Result<Domain, GeometryError> {
        if args.is_some() {
            Err(GeometryError::Spec(format!("builtin '{head}' takes no arguments")))
        } else {
            Ok(d)
        }
    };
    match head {
        "octant" => no_args(Domain::Cone(PolyhedralCone::new(vec![Vec3::x(), Vec3::y(), Vec3::z()])?)),
        "octant_complement" => no_args(Domain::Cone(PolyhedralCone::new(vec![
            Vec3::x(),
            Vec3::z(),
            Vec3::y(),
        ])?)),
        "free" => no_args(Domain::Free),
        "half_space" => no_args(Domain::HalfSpace(HalfSpace::upper())),
        "quarter_space_wedge" | "wedge" => {
            let kappa = match args {
                Some(a) => parse_args(head, a, 1)?[0],
                None => std::f64::consts::FRAC_PI_2,
            };
            Ok(Domain::Wedge(WedgeSpec::standard(kappa)?))
        }
        "box" => {
            let a = parse_args(head, args.unwrap_or(""), 3)?;
            if a.iter().any(|&s| !(s > 0.0)) {
                return Err(GeometryError::Spec("box sides must be positive".into()));
            }
            Ok(Domain::Polyhedron(unit_box(a[0], a[1], a[2])))
        }
        other => match other.parse::<PlatonicSolid>() {
            Ok(solid) => no_args(Domain::Polyhedron(platonic_solid(solid))),
            Err(_) => Err(GeometryError::Spec(format!("unknown builtin domain '{other}'"))),
        },
    }
}
