//! JSON formats for diagrams, embedding pairs, function systems and edge
//! assignments. Rationals are written as strings such as `"1/3"`; integers
//! are also accepted on input. Writing a parsed document reproduces it.

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::diagram::{BratteliDiagram, Edge, Growth};
use crate::dps::{AssignmentRule, DpsAssignment};
use crate::embedding::EmbeddingPair;
use crate::error::{Error, Result};
use crate::ifs::{AffineMap, AffineSystem, BoxRegion, IfsSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdometerDoc {
    pub base: u64,
    pub extra: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<usize>,
    /// Per level, `[source, target, rank]` triples.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<Vec<[usize; 3]>>,
    #[serde(default)]
    pub stationary_from: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odometer: Option<OdometerDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingDoc {
    pub lower: DiagramDoc,
    pub upper: DiagramDoc,
    /// One vertex map per side, levels `0..=L`.
    pub vertex_maps: [Vec<Vec<usize>>; 2],
    /// One edge map per side, levels `1..=L`.
    pub edge_maps: [Vec<Vec<usize>>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalDoc {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub matrix: Vec<Vec<RationalDoc>>,
    pub offset: Vec<RationalDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDoc {
    pub lo: Vec<RationalDoc>,
    pub hi: Vec<RationalDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<MapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull: Option<BoxDoc>,
    /// Number of symbols of a shift space, instead of maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_space: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDoc {
    pub ifs: IfsDoc,
    /// `"full_words"` or `"table"`.
    pub rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagram: Option<DiagramDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<Option<Vec<usize>>>>>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

fn rational(r: &RationalDoc) -> Result<BigRational> {
    match r {
        RationalDoc::Int(i) => Ok(BigRational::from_integer((*i).into())),
        RationalDoc::Text(s) => s.trim().parse().map_err(|_| Error::Parse(format!("bad rational {s:?}"))),
    }
}

fn rational_doc(x: &BigRational) -> RationalDoc {
    RationalDoc::Text(x.to_string())
}

fn rationals(v: &[RationalDoc]) -> Result<Vec<BigRational>> {
    v.iter().map(rational).collect()
}

impl DiagramDoc {
    pub fn from_diagram(d: &BratteliDiagram) -> Self {
        match d.growth() {
            Growth::Odometer { base, extra } => DiagramDoc {
                levels: Vec::new(),
                edges: Vec::new(),
                stationary_from: None,
                odometer: Some(OdometerDoc { base, extra }),
            },
            g => DiagramDoc {
                levels: d.vertex_counts().to_vec(),
                edges: d.levels().iter().map(|l| l.iter().map(|e| [e.source, e.target, e.rank]).collect()).collect(),
                stationary_from: match g {
                    Growth::Stationary { from } => Some(from),
                    _ => None,
                },
                odometer: None,
            },
        }
    }

    pub fn to_diagram(&self) -> Result<BratteliDiagram> {
        if let Some(o) = &self.odometer {
            if !self.levels.is_empty() || !self.edges.is_empty() || self.stationary_from.is_some() {
                return Err(Error::MalformedDiagram("an odometer takes no explicit levels".into()));
            }
            return BratteliDiagram::odometer(o.base, o.extra);
        }
        let edges = self.edges.iter().map(|l| l.iter().map(|&[s, t, r]| Edge::new(s, t, r)).collect()).collect();
        let d = BratteliDiagram::new(self.levels.clone(), edges, self.stationary_from)?;
        let report = d.validate();
        if !report.is_valid() {
            return Err(Error::MalformedDiagram(format!("{:?}", report.violations)));
        }
        Ok(d)
    }
}

impl EmbeddingDoc {
    pub fn from_pair(p: &EmbeddingPair) -> Self {
        EmbeddingDoc {
            lower: DiagramDoc::from_diagram(p.lower()),
            upper: DiagramDoc::from_diagram(p.upper()),
            vertex_maps: p.vertex_maps().clone(),
            edge_maps: p.edge_maps().clone(),
        }
    }

    pub fn to_pair(&self) -> Result<EmbeddingPair> {
        EmbeddingPair::with_vertex_maps(
            self.lower.to_diagram()?,
            self.upper.to_diagram()?,
            self.vertex_maps.clone(),
            self.edge_maps.clone(),
        )
    }
}

fn box_doc(b: &BoxRegion) -> BoxDoc {
    BoxDoc { lo: b.lo.iter().map(rational_doc).collect(), hi: b.hi.iter().map(rational_doc).collect() }
}

impl IfsDoc {
    pub fn from_system(s: &IfsSystem) -> Self {
        match s {
            IfsSystem::CodeSpace { symbols } => IfsDoc { maps: Vec::new(), hull: None, code_space: Some(*symbols) },
            IfsSystem::Affine(a) => IfsDoc {
                maps: a
                    .maps
                    .iter()
                    .map(|m| MapDoc {
                        matrix: m.matrix.iter().map(|r| r.iter().map(rational_doc).collect()).collect(),
                        offset: m.offset.iter().map(rational_doc).collect(),
                    })
                    .collect(),
                hull: Some(box_doc(&a.hull)),
                code_space: None,
            },
        }
    }

    pub fn to_system(&self) -> Result<IfsSystem> {
        if let Some(k) = self.code_space {
            if !self.maps.is_empty() || self.hull.is_some() {
                return Err(Error::Ifs("a shift space takes no maps".into()));
            }
            return crate::ifs::code_space_system(k);
        }
        let maps = self
            .maps
            .iter()
            .map(|m| {
                let matrix = m.matrix.iter().map(|r| rationals(r)).collect::<Result<Vec<_>>>()?;
                AffineMap::new(matrix, rationals(&m.offset)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let hull = match &self.hull {
            Some(b) => Some(BoxRegion::new(rationals(&b.lo)?, rationals(&b.hi)?)?),
            None => None,
        };
        Ok(IfsSystem::Affine(AffineSystem::new(maps, hull)?))
    }
}

impl AssignmentDoc {
    pub fn from_assignment(a: &DpsAssignment) -> Self {
        let ifs = IfsDoc::from_system(a.ifs());
        match a.rule() {
            AssignmentRule::FullWords => AssignmentDoc { ifs, rule: "full_words".into(), diagram: None, table: None },
            AssignmentRule::Table(t) => AssignmentDoc {
                ifs,
                rule: "table".into(),
                diagram: Some(DiagramDoc::from_diagram(a.diagram())),
                table: Some(t.clone()),
            },
        }
    }

    pub fn to_assignment(&self) -> Result<DpsAssignment> {
        let ifs = self.ifs.to_system()?;
        match (self.rule.as_str(), &self.diagram, &self.table) {
            ("full_words", None, None) => DpsAssignment::full_words(ifs),
            ("table", Some(d), Some(t)) => DpsAssignment::table(d.to_diagram()?, ifs, t.clone()),
            ("full_words", _, _) => Err(Error::Assignment("full_words takes no diagram or table".into())),
            ("table", _, _) => Err(Error::Assignment("table needs a diagram and a table".into())),
            (r, _, _) => Err(Error::Assignment(format!("unknown rule {r:?}"))),
        }
    }
}

pub fn parse_diagram(text: &str) -> Result<BratteliDiagram> {
    serde_json::from_str::<DiagramDoc>(text).map_err(parse_err)?.to_diagram()
}

pub fn diagram_to_json(d: &BratteliDiagram) -> String {
    serde_json::to_string(&DiagramDoc::from_diagram(d)).expect("serializable")
}

pub fn parse_embedding(text: &str) -> Result<EmbeddingPair> {
    serde_json::from_str::<EmbeddingDoc>(text).map_err(parse_err)?.to_pair()
}

pub fn embedding_to_json(p: &EmbeddingPair) -> String {
    serde_json::to_string(&EmbeddingDoc::from_pair(p)).expect("serializable")
}

pub fn parse_ifs(text: &str) -> Result<IfsSystem> {
    serde_json::from_str::<IfsDoc>(text).map_err(parse_err)?.to_system()
}

pub fn ifs_to_json(s: &IfsSystem) -> String {
    serde_json::to_string(&IfsDoc::from_system(s)).expect("serializable")
}

pub fn parse_assignment(text: &str) -> Result<DpsAssignment> {
    serde_json::from_str::<AssignmentDoc>(text).map_err(parse_err)?.to_assignment()
}

pub fn assignment_to_json(a: &DpsAssignment) -> String {
    serde_json::to_string(&AssignmentDoc::from_assignment(a)).expect("serializable")
}
