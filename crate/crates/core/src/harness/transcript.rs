//! Line-delimited JSON match records: a header line, one line per move, an outcome line.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::board::{BreakerMark, GameMode, Move, Player, Variant};
use crate::geometry::{Direction, GridPoint};
use crate::schedule::Schedule;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("malformed transcript: {0}")]
    Format(String),
}

/// Everything needed to rerun a match.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub engine_version: String,
    pub variant: Variant,
    pub batched: bool,
    pub n: usize,
    pub epsilon: f64,
    pub maker_schedule: String,
    pub breaker_schedule: String,
    pub maker: String,
    pub breaker: String,
    pub seed: u64,
    pub max_steps: u32,
    pub line_threshold: usize,
    pub directed_occupies: bool,
}

impl TranscriptHeader {
    pub fn mode(&self) -> Result<GameMode, TranscriptError> {
        GameMode::new(self.variant, self.batched, self.n, self.epsilon).map_err(|e| TranscriptError::Format(e.to_string()))
    }

    pub fn schedules(&self) -> Result<(Schedule, Schedule), TranscriptError> {
        let parse = |s: &str| s.parse::<Schedule>().map_err(|e| TranscriptError::Format(e.to_string()));
        Ok((parse(&self.maker_schedule)?, parse(&self.breaker_schedule)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Outcome {
    MakerWin { tau: u32, m_tau: u64 },
    Survived { steps: u32 },
}

impl Outcome {
    pub fn maker_won(&self) -> bool {
        matches!(self, Outcome::MakerWin { .. })
    }

    pub fn tau(&self) -> Option<u32> {
        match self {
            Outcome::MakerWin { tau, .. } => Some(*tau),
            Outcome::Survived { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveRecord {
    pub t: u32,
    pub player: Player,
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub header: TranscriptHeader,
    pub moves: Vec<MoveRecord>,
    pub outcome: Outcome,
}

/// Mark as written: `[x, y]` or `[x, y, dx, dy]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum MarkRepr {
    Directed([i64; 4]),
    Plain([i64; 2]),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Line {
    Header(TranscriptHeader),
    Move {
        t: u32,
        player: Player,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<[i64; 2]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        marks: Option<Vec<MarkRepr>>,
    },
    Outcome(Outcome),
}

impl Transcript {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &Line| {
            out.push_str(&serde_json::to_string(line).expect("transcript records serialize"));
            out.push('\n');
        };
        push(&Line::Header(self.header.clone()));
        for rec in &self.moves {
            let line = match &rec.mv {
                Move::Maker(pts) => Line::Move {
                    t: rec.t,
                    player: rec.player,
                    points: Some(pts.iter().map(|p| [p.x, p.y]).collect()),
                    marks: None,
                },
                Move::Breaker(marks) => Line::Move {
                    t: rec.t,
                    player: rec.player,
                    points: None,
                    marks: Some(
                        marks
                            .iter()
                            .map(|m| match m.dir {
                                Some(d) => MarkRepr::Directed([m.point.x, m.point.y, d.dx(), d.dy()]),
                                None => MarkRepr::Plain([m.point.x, m.point.y]),
                            })
                            .collect(),
                    ),
                },
            };
            push(&line);
        }
        push(&Line::Outcome(self.outcome.clone()));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        let mut header = None;
        let mut moves = Vec::new();
        let mut outcome = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            if outcome.is_some() {
                return Err(TranscriptError::Format(format!("line {line_no}: record after the outcome")));
            }
            let line: Line = serde_json::from_str(raw).map_err(|source| TranscriptError::Json { line: line_no, source })?;
            match line {
                Line::Header(h) if header.is_none() && line_no == 1 => header = Some(h),
                Line::Header(_) => return Err(TranscriptError::Format(format!("line {line_no}: unexpected header"))),
                _ if header.is_none() => {
                    return Err(TranscriptError::Format("first line must be the header".into()));
                }
                Line::Move { t, player, points, marks } => {
                    let mv = match (player, points, marks) {
                        (Player::Maker, Some(pts), None) => {
                            Move::Maker(pts.into_iter().map(|[x, y]| GridPoint::new(x, y)).collect())
                        }
                        (Player::Breaker, None, Some(marks)) => Move::Breaker(
                            marks
                                .into_iter()
                                .map(|m| match m {
                                    MarkRepr::Plain([x, y]) => Ok(BreakerMark::plain(GridPoint::new(x, y))),
                                    MarkRepr::Directed([x, y, dx, dy]) => Direction::try_from((dx, dy))
                                        .map(|d| BreakerMark::directed(GridPoint::new(x, y), d))
                                        .map_err(|e| TranscriptError::Format(format!("line {line_no}: {e}"))),
                                })
                                .collect::<Result<_, _>>()?,
                        ),
                        _ => {
                            return Err(TranscriptError::Format(format!(
                                "line {line_no}: maker moves carry points, breaker moves carry marks"
                            )))
                        }
                    };
                    moves.push(MoveRecord { t, player, mv });
                }
                Line::Outcome(o) => outcome = Some(o),
            }
        }
        let header = header.ok_or_else(|| TranscriptError::Format("empty transcript".into()))?;
        let outcome = outcome.ok_or_else(|| TranscriptError::Format("missing outcome record".into()))?;
        Ok(Transcript { header, moves, outcome })
    }

    pub fn write_to(&self, path: &Path) -> Result<(), TranscriptError> {
        fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, TranscriptError> {
        Self::from_jsonl(&fs::read_to_string(path)?)
    }
}
