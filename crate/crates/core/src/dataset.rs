//! Rating files to binary user vectors.
//!
//! Item ids are remapped densely to `[0, m)` in order of first appearance,
//! so `m` is the number of distinct items observed, not the raw id space.
//! The original ids are kept in [`Ratings::item_ids`] and exported with the
//! dataset.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sketching::UserVector;

/// Column layout of a ratings file. Columns are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingSchema {
    pub user_col: usize,
    pub item_col: usize,
    pub value_col: usize,
    pub separator: u8,
    pub has_header: bool,
}

impl RatingSchema {
    /// `user_ratedmovies.dat`: `userID movieID rating ...`, tab separated.
    pub fn movielens_hetrec() -> Self {
        RatingSchema {
            user_col: 0,
            item_col: 1,
            value_col: 2,
            separator: b'\t',
            has_header: true,
        }
    }

    /// `user_artists.dat`: `userID artistID weight`, tab separated.
    pub fn lastfm_hetrec() -> Self {
        Self::movielens_hetrec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rating {
    pub user: String,
    pub item: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ratings {
    pub triples: Vec<Rating>,
    /// Original id of each dense item index.
    pub item_ids: Vec<String>,
    pub source: String,
}

impl Ratings {
    pub fn universe(&self) -> u32 {
        self.item_ids.len() as u32
    }
}

pub fn load_ratings(path: impl AsRef<Path>, schema: &RatingSchema) -> Result<Ratings> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_ratings(BufReader::new(file), schema, &path.display().to_string())
}

pub fn read_ratings<R: Read>(reader: R, schema: &RatingSchema, source: &str) -> Result<Ratings> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(schema.separator)
        .has_headers(schema.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut item_index: HashMap<String, u32> = HashMap::new();
    let mut item_ids = Vec::new();
    let mut triples = Vec::new();
    let needed = schema.user_col.max(schema.item_col).max(schema.value_col) + 1;

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse {
            path: source.into(),
            line,
            message,
        };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < needed {
            return Err(bad(format!("expected at least {needed} columns, found {}", record.len())));
        }
        let value: f64 = record[schema.value_col]
            .parse()
            .map_err(|_| bad(format!("bad rating value {:?}", &record[schema.value_col])))?;
        if value.is_nan() {
            return Err(bad("rating value is NaN".into()));
        }
        let raw_item = &record[schema.item_col];
        let item = match item_index.get(raw_item) {
            Some(&i) => i,
            None => {
                let i = item_ids.len() as u32;
                item_index.insert(raw_item.to_string(), i);
                item_ids.push(raw_item.to_string());
                i
            }
        };
        triples.push(Rating {
            user: record[schema.user_col].to_string(),
            item,
            value,
        });
    }
    Ok(Ratings {
        triples,
        item_ids,
        source: source.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetUser {
    pub id: String,
    pub items: UserVector,
}

/// Non-empty user vectors over a shared universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub users: Vec<DatasetUser>,
    pub universe: u32,
    pub item_ids: Vec<String>,
    pub provenance: String,
}

/// Groups ratings per user, keeping users in order of first appearance.
fn group_by_user(ratings: &Ratings) -> Vec<(String, Vec<(u32, f64)>)> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(String, Vec<(u32, f64)>)> = Vec::new();
    for r in &ratings.triples {
        let slot = *index.entry(r.user.as_str()).or_insert_with(|| {
            groups.push((r.user.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push((r.item, r.value));
    }
    groups
}

fn assemble(ratings: &Ratings, users: Vec<(String, Vec<u32>)>, provenance: String) -> Result<Dataset> {
    let universe = ratings.universe();
    let users = users
        .into_iter()
        .filter(|(_, items)| !items.is_empty())
        .map(|(id, items)| {
            Ok(DatasetUser {
                id,
                items: UserVector::new(items, universe)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        users,
        universe: universe.max(1),
        item_ids: ratings.item_ids.clone(),
        provenance,
    })
}

/// Keeps each user's items rated at least `threshold`.
pub fn build_threshold_vectors(ratings: &Ratings, threshold: f64) -> Result<Dataset> {
    let users = group_by_user(ratings)
        .into_iter()
        .map(|(id, rows)| {
            let items = rows
                .into_iter()
                .filter(|&(_, v)| v >= threshold)
                .map(|(i, _)| i)
                .collect();
            (id, items)
        })
        .collect();
    assemble(ratings, users, format!("{} | value >= {threshold}", ratings.source))
}

/// Keeps each user's `n` highest-valued items, ties broken by smaller item.
pub fn build_topn_vectors(ratings: &Ratings, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("top-n requires n >= 1"));
    }
    let users = group_by_user(ratings)
        .into_iter()
        .map(|(id, mut rows)| {
            // a repeated item counts once, with its largest value
            rows.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            rows.dedup_by_key(|r| r.0);
            rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            (id, rows.into_iter().take(n).map(|(i, _)| i).collect())
        })
        .collect();
    assemble(ratings, users, format!("{} | top-{n}", ratings.source))
}

/// Keeps exactly the users holding at least `tau_min` items.
pub fn filter_min_size(ds: &Dataset, tau_min: usize) -> Dataset {
    Dataset {
        users: ds
            .users
            .iter()
            .filter(|u| u.items.len() >= tau_min)
            .cloned()
            .collect(),
        universe: ds.universe,
        item_ids: ds.item_ids.clone(),
        provenance: format!("{} | size >= {tau_min}", ds.provenance),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeStats {
    pub users: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: usize,
    pub max: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn size_stats(&self) -> SizeStats {
        let sizes: Vec<f64> = self.users.iter().map(|u| u.items.len() as f64).collect();
        let n = sizes.len().max(1) as f64;
        let mean = sizes.iter().sum::<f64>() / n;
        let var = sizes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        SizeStats {
            users: self.users.len(),
            mean,
            std: var.sqrt(),
            min: self.users.iter().map(|u| u.items.len()).min().unwrap_or(0),
            max: self.users.iter().map(|u| u.items.len()).max().unwrap_or(0),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&DatasetFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// JSON export layout: `{"m": .., "users": [{"id": .., "items": [..]}], ..}`.
#[derive(Debug, Serialize, Deserialize)]
struct DatasetFile {
    m: u32,
    users: Vec<UserRecord>,
    #[serde(default)]
    item_ids: Vec<String>,
    #[serde(default)]
    provenance: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct UserRecord {
    id: String,
    items: Vec<u32>,
}

impl From<&Dataset> for DatasetFile {
    fn from(ds: &Dataset) -> Self {
        DatasetFile {
            m: ds.universe,
            users: ds
                .users
                .iter()
                .map(|u| UserRecord {
                    id: u.id.clone(),
                    items: u.items.items().to_vec(),
                })
                .collect(),
            item_ids: ds.item_ids.clone(),
            provenance: ds.provenance.clone(),
        }
    }
}

impl TryFrom<DatasetFile> for Dataset {
    type Error = Error;

    fn try_from(file: DatasetFile) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut users = Vec::with_capacity(file.users.len());
        for rec in file.users {
            if !seen.insert(rec.id.clone()) {
                return Err(Error::Format(format!("duplicate user id {:?}", rec.id)));
            }
            let items = UserVector::new(rec.items, file.m)?;
            if items.is_empty() {
                return Err(Error::Format(format!("user {:?} has no items", rec.id)));
            }
            users.push(DatasetUser { id: rec.id, items });
        }
        Ok(Dataset {
            users,
            universe: file.m,
            item_ids: file.item_ids,
            provenance: file.provenance,
        })
    }
}
