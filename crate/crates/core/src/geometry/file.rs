use serde::{Deserialize, Serialize};

use super::{builtin_domain, Domain, GeometryError, HalfSpace, Mat3, PolyhedralCone, Polyhedron, Vec3, WedgeSpec};

/// JSON-shaped domain description.
///
/// Cone directions need not be normalized; they are scaled to unit length
/// on load. Polyhedron edges are derived from the faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Cone {
        vertex_dirs: Vec<[f64; 3]>,
    },
    Polyhedron {
        vertices: Vec<[f64; 3]>,
        faces: Vec<Vec<usize>>,
    },
    Wedge {
        kappa: f64,
        #[serde(default)]
        rotation: Option<[[f64; 3]; 3]>,
    },
    HalfSpace {
        normal: [f64; 3],
        #[serde(default)]
        offset: f64,
    },
    Builtin {
        name: String,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain, GeometryError> {
        match self {
            DomainSpec::Cone { vertex_dirs } => {
                let dirs: Vec<Vec3> = vertex_dirs.iter().map(|d| Vec3::from(*d)).collect();
                Ok(Domain::Cone(PolyhedralCone::from_directions(&dirs)?))
            }
            DomainSpec::Polyhedron { vertices, faces } => {
                let v = vertices.iter().map(|p| Vec3::from(*p)).collect();
                Ok(Domain::Polyhedron(Polyhedron::new(v, faces.clone())?))
            }
            DomainSpec::Wedge { kappa, rotation } => {
                let r = match rotation {
                    Some(rows) => Mat3::from_fn(|i, j| rows[i][j]),
                    None => Mat3::identity(),
                };
                Ok(Domain::Wedge(WedgeSpec::new(*kappa, r)?))
            }
            DomainSpec::HalfSpace { normal, offset } => Ok(Domain::HalfSpace(HalfSpace::new(Vec3::from(*normal), *offset)?)),
            DomainSpec::Builtin { name } => builtin_domain(name),
        }
    }
}

/// Parses domain JSON, reporting the path of the offending field on error.
///
/// The `type` tag is dispatched by hand: serde's internally tagged enums
/// buffer their content and lose the field path.
pub fn parse_domain_json(text: &str) -> Result<DomainSpec, GeometryError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GeometryError::Spec(format!("malformed JSON: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| GeometryError::Spec("domain spec must be a JSON object".into()))?;
    let tag = match obj.remove("type") {
        Some(serde_json::Value::String(s)) => s,
        Some(_) => return Err(GeometryError::Spec("field 'type': expected a string".into())),
        None => return Err(GeometryError::Spec("missing field 'type'".into())),
    };
    fn fields<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T, GeometryError> {
        serde_path_to_error::deserialize(v).map_err(|e| {
            let path = e.path().to_string();
            GeometryError::Spec(format!("field '{}': {}", path, e.inner()))
        })
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ConeFields {
        vertex_dirs: Vec<[f64; 3]>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct PolyFields {
        vertices: Vec<[f64; 3]>,
        faces: Vec<Vec<usize>>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct WedgeFields {
        kappa: f64,
        #[serde(default)]
        rotation: Option<[[f64; 3]; 3]>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct HalfSpaceFields {
        normal: [f64; 3],
        #[serde(default)]
        offset: f64,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct BuiltinFields {
        name: String,
    }
    match tag.as_str() {
        "cone" => fields::<ConeFields>(value).map(|f| DomainSpec::Cone { vertex_dirs: f.vertex_dirs }),
        "polyhedron" => fields::<PolyFields>(value).map(|f| DomainSpec::Polyhedron {
            vertices: f.vertices,
            faces: f.faces,
        }),
        "wedge" => fields::<WedgeFields>(value).map(|f| DomainSpec::Wedge {
            kappa: f.kappa,
            rotation: f.rotation,
        }),
        "half_space" => fields::<HalfSpaceFields>(value).map(|f| DomainSpec::HalfSpace {
            normal: f.normal,
            offset: f.offset,
        }),
        "builtin" => fields::<BuiltinFields>(value).map(|f| DomainSpec::Builtin { name: f.name }),
        other => Err(GeometryError::Spec(format!(
            "field 'type': unknown domain type '{other}' (expected cone, polyhedron, wedge, half_space or builtin)"
        ))),
    }
}

/// Loads `builtin:<name>` or a JSON domain file.
pub fn load_domain(arg: &str) -> Result<(Domain, DomainSpec), GeometryError> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        let spec = DomainSpec::Builtin { name: name.to_string() };
        return Ok((spec.build()?, spec));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| GeometryError::Spec(format!("cannot read '{arg}': {e}")))?;
    let spec = parse_domain_json(&text)?;
    Ok((spec.build()?, spec))
}
