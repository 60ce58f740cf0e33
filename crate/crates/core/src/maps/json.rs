use serde::{Deserialize, Serialize};

use super::{CombinatorialType, MapError, TropicalStableMap, TypeEdge, TypeLeg, Vector};
use crate::curves::EdgeLength;
use crate::exactmath::{format_rational, parse_rational};
use crate::polyhedral::{ConeId, Fan};

/// Cones are written as lists of their ray vectors, so documents do not depend on ray order.
pub type ConeJson = Vec<Vec<i64>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeEdgeJson {
    pub tail: usize,
    pub head: usize,
    pub contact: Vector,
    pub carrier: Option<ConeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegJson {
    pub label: usize,
    pub vertex: usize,
    pub contact: Vector,
    pub carrier: Option<ConeJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeJson {
    pub vertex_cones: Vec<ConeJson>,
    pub edges: Vec<TypeEdgeJson>,
    pub legs: Vec<LegJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(rename = "type")]
    pub ty: TypeJson,
    pub positions: Vec<Vec<String>>,
    pub lengths: Vec<String>,
}

fn cone_to_json(fan: &Fan, c: ConeId) -> ConeJson {
    fan.cone_rays(c)
}

fn cone_from_json(fan: &Fan, c: &ConeJson) -> Result<ConeId, MapError> {
    fan.cone_from_rays(c).ok_or_else(|| MapError::UnknownCone(c.clone()))
}

impl CombinatorialType {
    pub fn to_json(&self, fan: &Fan) -> TypeJson {
        TypeJson {
            vertex_cones: self.vertex_cones.iter().map(|&c| cone_to_json(fan, c)).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| TypeEdgeJson {
                    tail: e.tail,
                    head: e.head,
                    contact: e.contact.clone(),
                    carrier: e.carrier.map(|c| cone_to_json(fan, c)),
                })
                .collect(),
            legs: self
                .legs
                .iter()
                .map(|l| LegJson {
                    label: l.label,
                    vertex: l.vertex,
                    contact: l.contact.clone(),
                    carrier: l.carrier.map(|c| cone_to_json(fan, c)),
                })
                .collect(),
        }
    }

    pub fn from_json(fan: &Fan, j: &TypeJson) -> Result<Self, MapError> {
        let vertex_cones = j.vertex_cones.iter().map(|c| cone_from_json(fan, c)).collect::<Result<Vec<_>, _>>()?;
        let edges = j
            .edges
            .iter()
            .map(|e| {
                Ok(TypeEdge {
                    tail: e.tail,
                    head: e.head,
                    contact: e.contact.clone(),
                    carrier: e.carrier.as_ref().map(|c| cone_from_json(fan, c)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, MapError>>()?;
        let legs = j
            .legs
            .iter()
            .map(|l| {
                Ok(TypeLeg {
                    label: l.label,
                    vertex: l.vertex,
                    contact: l.contact.clone(),
                    carrier: l.carrier.as_ref().map(|c| cone_from_json(fan, c)).transpose()?,
                })
            })
            .collect::<Result<Vec<_>, MapError>>()?;
        Ok(CombinatorialType { vertex_cones, edges, legs })
    }
}

impl TropicalStableMap {
    pub fn to_json(&self, fan: &Fan) -> MapJson {
        MapJson {
            schema: Some(crate::SCHEMA.to_string()),
            ty: self.ty.to_json(fan),
            positions: self.positions.iter().map(|p| p.iter().map(format_rational).collect()).collect(),
            lengths: self.lengths.iter().map(|l| l.to_text()).collect(),
        }
    }

    pub fn from_json(fan: &Fan, j: &MapJson) -> Result<Self, MapError> {
        let positions = j
            .positions
            .iter()
            .map(|p| p.iter().map(|s| parse_rational(s).map_err(|_| MapError::BadNumber(s.clone()))).collect())
            .collect::<Result<Vec<_>, _>>()?;
        let lengths = j
            .lengths
            .iter()
            .map(|s| EdgeLength::parse(s).map_err(|_| MapError::BadNumber(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TropicalStableMap { ty: CombinatorialType::from_json(fan, &j.ty)?, positions, lengths })
    }
}
