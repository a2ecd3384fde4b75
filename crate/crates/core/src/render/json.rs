//! JSON frame manifest.
//!
//! ```text
//! {fps, levels, mode, hulls, groups, variables,
//!  frames: [{index, clock, phase: {kind, from, to, u},
//!            samples: [{x, y, group}], vectors: [{x, y, name}],
//!            hulls: [{group, passthrough, vertices: [[x, y], ...]}],
//!            shadows: [{level, opacity, samples: [{x, y, group}]}],
//!            state}]}
//! ```
//!
//! Numbers are written in shortest round-trip form, so import followed by
//! export reproduces the document exactly.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anim::{Frame, FrameMode, FrameSequence, GroupHull, HullShape, Phase, Shadow};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDoc {
    fps: f64,
    levels: Vec<String>,
    mode: String,
    hulls: bool,
    groups: Vec<String>,
    variables: Vec<String>,
    frames: Vec<FrameDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameDoc {
    index: usize,
    clock: f64,
    phase: PhaseDoc,
    samples: Vec<SampleDoc>,
    vectors: Vec<VectorDoc>,
    hulls: Vec<HullDoc>,
    shadows: Vec<ShadowDoc>,
    state: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseDoc {
    kind: String,
    from: String,
    to: Option<String>,
    u: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    x: f64,
    y: f64,
    group: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorDoc {
    x: f64,
    y: f64,
    name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HullDoc {
    group: String,
    passthrough: bool,
    vertices: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShadowDoc {
    level: String,
    opacity: f64,
    samples: Vec<SampleDoc>,
}

fn samples_doc(points: &[[f64; 2]], groups: &[usize], names: &[String]) -> Vec<SampleDoc> {
    points
        .iter()
        .zip(groups)
        .map(|(p, &g)| SampleDoc {
            x: p[0],
            y: p[1],
            group: names[g].clone(),
        })
        .collect()
}

pub fn export_frames_json(seq: &FrameSequence) -> Result<String> {
    let names = &seq.group_names;
    let frames = seq
        .frames
        .iter()
        .map(|f| FrameDoc {
            index: f.index,
            clock: f.clock,
            phase: match &f.phase {
                Phase::Pause { level } => PhaseDoc {
                    kind: "pause".into(),
                    from: level.clone(),
                    to: None,
                    u: None,
                },
                Phase::Transition { from, to, u } => PhaseDoc {
                    kind: "transition".into(),
                    from: from.clone(),
                    to: Some(to.clone()),
                    u: Some(*u),
                },
            },
            samples: samples_doc(&f.samples, &f.sample_groups, names),
            vectors: f
                .vectors
                .iter()
                .zip(f.variable_names.iter())
                .map(|(v, n)| VectorDoc {
                    x: v[0],
                    y: v[1],
                    name: n.clone(),
                })
                .collect(),
            hulls: f
                .hulls
                .iter()
                .flatten()
                .map(|h| HullDoc {
                    group: names[h.group].clone(),
                    passthrough: h.shape.is_passthrough(),
                    vertices: h.shape.vertices().to_vec(),
                })
                .collect(),
            shadows: f
                .shadows
                .iter()
                .map(|s| ShadowDoc {
                    level: s.level.clone(),
                    opacity: s.opacity,
                    samples: samples_doc(&s.samples, &s.groups, names),
                })
                .collect(),
            state: f.state_index,
        })
        .collect();
    let doc = SequenceDoc {
        fps: seq.fps,
        levels: seq.levels.clone(),
        mode: seq.mode.as_str().into(),
        hulls: seq.hulls,
        groups: seq.group_names.to_vec(),
        variables: seq.variable_names.to_vec(),
        frames,
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn import_frames_json(text: &str) -> Result<FrameSequence> {
    let doc: SequenceDoc = serde_json::from_str(text)?;
    let group_index: HashMap<&str, usize> = doc
        .groups
        .iter()
        .enumerate()
        .map(|(i, g)| (g.as_str(), i))
        .collect();
    let lookup = |g: &str| {
        group_index
            .get(g)
            .copied()
            .ok_or_else(|| Error::Shape(format!("frame refers to undeclared group `{g}`")))
    };
    let split = |samples: &[SampleDoc]| -> Result<(Vec<[f64; 2]>, Vec<usize>)> {
        let pts = samples.iter().map(|s| [s.x, s.y]).collect();
        let groups = samples.iter().map(|s| lookup(&s.group)).collect::<Result<_>>()?;
        Ok((pts, groups))
    };
    let group_names = Arc::new(doc.groups.clone());
    let variable_names = Arc::new(doc.variables.clone());

    let mut frames = Vec::with_capacity(doc.frames.len());
    for f in &doc.frames {
        let phase = match (f.phase.kind.as_str(), &f.phase.to, f.phase.u) {
            ("pause", None, None) => Phase::Pause {
                level: f.phase.from.clone(),
            },
            ("transition", Some(to), Some(u)) => Phase::Transition {
                from: f.phase.from.clone(),
                to: to.clone(),
                u,
            },
            _ => return Err(Error::Shape(format!("frame {} has a malformed phase", f.index))),
        };
        let (samples, sample_groups) = split(&f.samples)?;
        let hulls = if doc.hulls {
            Some(
                f.hulls
                    .iter()
                    .map(|h| {
                        Ok(GroupHull {
                            group: lookup(&h.group)?,
                            shape: if h.passthrough {
                                HullShape::Points(h.vertices.clone())
                            } else {
                                HullShape::Polygon(h.vertices.clone())
                            },
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let shadows = f
            .shadows
            .iter()
            .map(|s| {
                let (samples, groups) = split(&s.samples)?;
                Ok(Shadow {
                    level: s.level.clone(),
                    opacity: s.opacity,
                    samples,
                    groups,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if f.vectors.len() != variable_names.len() {
            return Err(Error::Shape(format!(
                "frame {} has {} vectors for {} variables",
                f.index,
                f.vectors.len(),
                variable_names.len()
            )));
        }
        frames.push(Frame {
            index: f.index,
            clock: f.clock,
            phase,
            state_index: f.state,
            samples,
            sample_groups,
            vectors: f.vectors.iter().map(|v| [v.x, v.y]).collect(),
            hulls,
            shadows,
            group_names: Arc::clone(&group_names),
            variable_names: Arc::clone(&variable_names),
        });
    }
    Ok(FrameSequence {
        frames,
        fps: doc.fps,
        levels: doc.levels,
        mode: doc.mode.parse::<FrameMode>()?,
        hulls: doc.hulls,
        group_names,
        variable_names,
    })
}
