//! JSON-lines rating datasets and world dumps.
//!
//! A dataset line is one rating event:
//!
//! ```text
//! {"rater":"u1","author":"u2","review":"r9","category":"books","label_or_value":"Very Helpful","seq":17}
//! ```
//!
//! A world dump is a header line (`{"header":{...}}`) carrying the generator
//! configuration, the agent/category/review tables and the outcome rule,
//! followed by one dataset line per rating event in sequence order. Dump
//! lines are themselves valid dataset lines.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Agent, AgentId, Rating, Review, SuccessRule, World, WorldConfig};
use crate::error::{Error, Result};

pub const DUMP_FORMAT: &str = "stereotrust-world/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelOrValue {
    Value(f64),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub rater: String,
    pub author: String,
    pub review: String,
    pub category: String,
    pub label_or_value: LabelOrValue,
    pub seq: u64,
}

/// Ordinal helpfulness labels and their numeric ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelTable(pub Vec<(String, f64)>);

impl Default for LabelTable {
    fn default() -> Self {
        LabelTable(
            [
                ("Off Topic", 0.0),
                ("Not Helpful", 0.2),
                ("Somewhat Helpful", 0.4),
                ("Helpful", 0.6),
                ("Very Helpful", 0.8),
                ("Most Helpful", 1.0),
            ]
            .iter()
            .map(|(l, v)| (l.to_string(), *v))
            .collect(),
        )
    }
}

impl LabelTable {
    pub fn value(&self, label: &str) -> Option<f64> {
        self.0.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestConfig {
    pub labels: LabelTable,
    /// A transaction succeeds when the rating is at least this value.
    pub success_threshold: f64,
    /// Reviews with fewer ratings are left out of ground truth.
    pub min_ratings: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            labels: LabelTable::default(),
            success_threshold: 0.8,
            min_ratings: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DumpReview {
    name: String,
    author: AgentId,
    category: u32,
    product: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    quality: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DumpHeader {
    format: String,
    seed: Option<u64>,
    config: Option<WorldConfig>,
    success: SuccessRule,
    min_ratings_for_truth: usize,
    categories: Vec<String>,
    agents: Vec<Agent>,
    reviews: Vec<DumpReview>,
}

#[derive(Debug, Deserialize)]
struct HeaderLine {
    header: DumpHeader,
}

fn parse_record(line: &str, lineno: usize) -> Result<DatasetRecord> {
    serde_json::from_str(line).map_err(|e| Error::Parse {
        line: lineno,
        message: e.to_string(),
    })
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    fn id(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(name.to_string(), id);
        self.names.push(name.to_string());
        id
    }
}

fn check_sequences(world: &World, lines: &[usize]) -> Result<()> {
    let mut last: HashMap<AgentId, u64> = HashMap::new();
    for (r, &line) in world.ratings.iter().zip(lines) {
        if let Some(&prev) = last.get(&r.rater) {
            if r.seq <= prev {
                return Err(Error::Schema {
                    line,
                    message: format!("sequence {} not increasing for rater", r.seq),
                });
            }
        }
        last.insert(r.rater, r.seq);
    }
    Ok(())
}

fn sort_by_seq(ratings: Vec<Rating>, lines: Vec<usize>) -> (Vec<Rating>, Vec<usize>) {
    let mut paired: Vec<(Rating, usize)> = ratings.into_iter().zip(lines).collect();
    paired.sort_by_key(|(r, _)| r.seq);
    paired.into_iter().unzip()
}

fn rating_value(record: &DatasetRecord, labels: &LabelTable, lineno: usize) -> Result<f64> {
    let value = match &record.label_or_value {
        LabelOrValue::Value(v) => *v,
        LabelOrValue::Label(l) => labels.value(l).ok_or_else(|| Error::Schema {
            line: lineno,
            message: format!("unknown rating label {l:?}"),
        })?,
    };
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::Schema {
            line: lineno,
            message: format!("rating {value} outside [0, 1]"),
        });
    }
    Ok(value)
}

impl World {
    /// Build a world from a JSON-lines rating dataset. A leading dump header
    /// line, if present, is ignored.
    pub fn ingest<R: BufRead>(reader: R, config: &IngestConfig) -> Result<World> {
        let mut agents = Interner::default();
        let mut categories = Interner::default();
        let mut review_ids = Interner::default();
        let mut reviews: Vec<Review> = Vec::new();
        let mut ratings = Vec::new();
        let mut lines = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if lineno == 1 && line.trim_start().starts_with("{\"header\"") {
                continue;
            }
            let rec = parse_record(&line, lineno)?;
            let value = rating_value(&rec, &config.labels, lineno)?;
            let rater = agents.id(&rec.rater);
            let author = agents.id(&rec.author);
            if rater == author {
                return Err(Error::Schema {
                    line: lineno,
                    message: "agent rates its own review".into(),
                });
            }
            let category = categories.id(&rec.category);
            let review = review_ids.id(&rec.review);
            if review as usize == reviews.len() {
                reviews.push(Review {
                    name: rec.review.clone(),
                    author,
                    category,
                    product: 0,
                    true_quality: None,
                });
            } else {
                let known = &reviews[review as usize];
                if known.author != author || known.category != category {
                    return Err(Error::Schema {
                        line: lineno,
                        message: format!("review {:?} changes author or category", rec.review),
                    });
                }
            }
            ratings.push(Rating {
                rater,
                review,
                value,
                seq: rec.seq,
            });
            lines.push(lineno);
        }
        let (ratings, lines) = sort_by_seq(ratings, lines);
        let world = World {
            config: None,
            categories: categories.names,
            agents: agents
                .names
                .into_iter()
                .map(|name| Agent { name, honest: None })
                .collect(),
            reviews,
            ratings,
            success: SuccessRule::AtLeast(config.success_threshold),
            min_ratings_for_truth: config.min_ratings,
        };
        check_sequences(&world, &lines)?;
        Ok(world)
    }

    /// Write the header line and one dataset line per rating event.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        let header = DumpHeader {
            format: DUMP_FORMAT.to_string(),
            seed: self.config.as_ref().map(|c| c.rng_seed),
            config: self.config.clone(),
            success: self.success,
            min_ratings_for_truth: self.min_ratings_for_truth,
            categories: self.categories.clone(),
            agents: self.agents.clone(),
            reviews: self
                .reviews
                .iter()
                .map(|r| DumpReview {
                    name: r.name.clone(),
                    author: r.author,
                    category: r.category,
                    product: r.product,
                    quality: r.true_quality,
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &serde_json::json!({ "header": header })).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
        for r in &self.ratings {
            let review = &self.reviews[r.review as usize];
            let rec = DatasetRecord {
                rater: self.agents[r.rater as usize].name.clone(),
                author: self.agents[review.author as usize].name.clone(),
                review: review.name.clone(),
                category: self.categories[review.category as usize].clone(),
                label_or_value: LabelOrValue::Value(r.value),
                seq: r.seq,
            };
            serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Inverse of [`World::dump`].
    pub fn load<R: BufRead>(reader: R) -> Result<World> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => {
                let line = line?;
                serde_json::from_str::<HeaderLine>(&line)
                    .map_err(|e| Error::Parse {
                        line: 1,
                        message: format!("missing or malformed dump header: {e}"),
                    })?
                    .header
            }
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "empty world dump".into(),
                })
            }
        };
        if header.format != DUMP_FORMAT {
            return Err(Error::Schema {
                line: 1,
                message: format!("unsupported dump format {:?}", header.format),
            });
        }
        let n_agents = header.agents.len() as u32;
        let n_categories = header.categories.len() as u32;
        for r in &header.reviews {
            if r.author >= n_agents || r.category >= n_categories {
                return Err(Error::Schema {
                    line: 1,
                    message: format!("review {:?} references unknown agent or category", r.name),
                });
            }
        }
        let agent_ids: HashMap<&str, AgentId> = header
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.as_str(), i as AgentId))
            .collect();
        let review_ids: HashMap<&str, u32> = header
            .reviews
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.as_str(), i as u32))
            .collect();
        let mut ratings = Vec::new();
        let mut line_numbers = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec = parse_record(&line, lineno)?;
            let schema = |message: String| Error::Schema { line: lineno, message };
            let value = match rec.label_or_value {
                LabelOrValue::Value(v) if (0.0..=1.0).contains(&v) => v,
                _ => return Err(schema("dump ratings must be numeric in [0, 1]".into())),
            };
            let rater = *agent_ids
                .get(rec.rater.as_str())
                .ok_or_else(|| schema(format!("unknown rater {:?}", rec.rater)))?;
            let review = *review_ids
                .get(rec.review.as_str())
                .ok_or_else(|| schema(format!("unknown review {:?}", rec.review)))?;
            let r = &header.reviews[review as usize];
            if header.agents[r.author as usize].name != rec.author
                || header.categories[r.category as usize] != rec.category
            {
                return Err(schema(format!("review {:?} disagrees with header", rec.review)));
            }
            ratings.push(Rating {
                rater,
                review,
                value,
                seq: rec.seq,
            });
            line_numbers.push(lineno);
        }
        let (ratings, line_numbers) = sort_by_seq(ratings, line_numbers);
        let world = World {
            config: header.config,
            categories: header.categories,
            agents: header.agents,
            reviews: header
                .reviews
                .into_iter()
                .map(|r| Review {
                    name: r.name,
                    author: r.author,
                    category: r.category,
                    product: r.product,
                    true_quality: r.quality,
                })
                .collect(),
            ratings,
            success: header.success,
            min_ratings_for_truth: header.min_ratings_for_truth,
        };
        check_sequences(&world, &line_numbers)?;
        Ok(world)
    }
}
