use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Gender, ItemCatalog, ItemId, Rating, RatingScale, RatingsDataset, UserDemographics};
use crate::error::{Error, Result};

const ML_DELIMITER: &str = "::";

/// Column layout for a character-delimited ratings file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelimitedRatings {
    pub delimiter: String,
    pub user_column: usize,
    pub item_column: usize,
    pub rating_column: usize,
    #[serde(default)]
    pub timestamp_column: Option<usize>,
    #[serde(default)]
    pub has_header: bool,
    pub scale: RatingScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RatingsFormat {
    /// `UserID::MovieID::Rating::Timestamp`, ratings on a 1–5 scale.
    #[serde(rename = "movielens-1m")]
    MovieLens1M,
    #[serde(rename = "delimited")]
    Delimited(DelimitedRatings),
}

impl RatingsFormat {
    pub fn scale(&self) -> RatingScale {
        match self {
            RatingsFormat::MovieLens1M => RatingScale::MOVIELENS,
            RatingsFormat::Delimited(d) => d.scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelimitedCatalog {
    pub delimiter: String,
    pub item_column: usize,
    pub genres_column: usize,
    pub genre_separator: String,
    #[serde(default)]
    pub has_header: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum CatalogFormat {
    /// `MovieID::Title::Genre1|Genre2|...`
    #[serde(rename = "movielens-1m")]
    MovieLens1M,
    #[serde(rename = "delimited")]
    Delimited(DelimitedCatalog),
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Yields `(1-based line number, line)` for non-blank lines. MovieLens files
/// are Latin-1 encoded, so invalid UTF-8 is replaced rather than rejected.
fn lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, String)>>> {
    let mut reader = open(path)?;
    let path = path.to_path_buf();
    let mut line_no = 0;
    let mut buf = Vec::new();
    Ok(std::iter::from_fn(move || loop {
        buf.clear();
        line_no += 1;
        match reader.read_until(b'\n', &mut buf) {
            Ok(0) => return None,
            Ok(_) => {
                let text = String::from_utf8_lossy(&buf);
                let text = text.trim_end_matches(['\n', '\r']);
                if text.trim().is_empty() {
                    continue;
                }
                return Some(Ok((line_no, text.to_string())));
            }
            Err(e) => return Some(Err(Error::io(&path, e))),
        }
    }))
}

fn field<'a>(fields: &[&'a str], col: usize, path: &Path, line: usize, what: &str) -> Result<&'a str> {
    fields
        .get(col)
        .map(|f| f.trim())
        .ok_or_else(|| Error::malformed(path, line, format!("missing {what} column {col}")))
}

fn number<T: std::str::FromStr>(raw: &str, path: &Path, line: usize, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::malformed(path, line, format!("invalid {what} '{raw}'")))
}

pub fn parse_ratings(path: &Path, format: &RatingsFormat) -> Result<RatingsDataset> {
    let mut ratings = Vec::new();
    let (delimiter, cols, has_header) = match format {
        RatingsFormat::MovieLens1M => (ML_DELIMITER, (0, 1, 2, Some(3)), false),
        RatingsFormat::Delimited(d) => (
            d.delimiter.as_str(),
            (d.user_column, d.item_column, d.rating_column, d.timestamp_column),
            d.has_header,
        ),
    };
    if delimiter.is_empty() {
        return Err(Error::InvalidArgument("empty delimiter".into()));
    }
    let scale = format.scale();

    for (n, entry) in lines(path)?.enumerate() {
        let (line, text) = entry?;
        if has_header && n == 0 {
            continue;
        }
        let fields: Vec<&str> = text.split(delimiter).collect();
        if matches!(format, RatingsFormat::MovieLens1M) && fields.len() != 4 {
            return Err(Error::malformed(
                path,
                line,
                format!("expected 4 '::'-separated fields, found {}", fields.len()),
            ));
        }
        let user = number(field(&fields, cols.0, path, line, "user")?, path, line, "user id")?;
        let item = number(field(&fields, cols.1, path, line, "item")?, path, line, "item id")?;
        let value: f64 = number(field(&fields, cols.2, path, line, "rating")?, path, line, "rating")?;
        let timestamp = match cols.3 {
            Some(c) => Some(number(field(&fields, c, path, line, "timestamp")?, path, line, "timestamp")?),
            None => None,
        };
        if !value.is_finite() || !scale.contains(value) {
            return Err(Error::malformed(
                path,
                line,
                format!("rating {value} outside scale [{}, {}]", scale.min, scale.max),
            ));
        }
        ratings.push(Rating {
            user,
            item,
            value,
            timestamp,
        });
    }
    RatingsDataset::new(ratings, scale)
}

/// Writes ratings in the given format; timestamps default to 0 where the
/// format requires one and the record has none.
pub fn write_ratings(dataset: &RatingsDataset, path: &Path, format: &RatingsFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    match format {
        RatingsFormat::MovieLens1M => {
            for r in dataset.ratings() {
                writeln!(
                    out,
                    "{}::{}::{}::{}",
                    r.user,
                    r.item,
                    r.value,
                    r.timestamp.unwrap_or(0)
                )
                .map_err(io)?;
            }
        }
        RatingsFormat::Delimited(d) => {
            let mut width = d.user_column.max(d.item_column).max(d.rating_column);
            if let Some(t) = d.timestamp_column {
                width = width.max(t);
            }
            if d.has_header {
                let mut header = vec![String::new(); width + 1];
                header[d.user_column] = "user".into();
                header[d.item_column] = "item".into();
                header[d.rating_column] = "rating".into();
                if let Some(t) = d.timestamp_column {
                    header[t] = "timestamp".into();
                }
                writeln!(out, "{}", header.join(&d.delimiter)).map_err(io)?;
            }
            for r in dataset.ratings() {
                let mut row = vec![String::new(); width + 1];
                row[d.user_column] = r.user.to_string();
                row[d.item_column] = r.item.to_string();
                row[d.rating_column] = r.value.to_string();
                if let Some(t) = d.timestamp_column {
                    row[t] = r.timestamp.unwrap_or(0).to_string();
                }
                writeln!(out, "{}", row.join(&d.delimiter)).map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

pub fn parse_item_catalog(path: &Path, format: &CatalogFormat) -> Result<ItemCatalog> {
    let mut entries: Vec<(ItemId, Vec<String>)> = Vec::new();
    for (n, entry) in lines(path)?.enumerate() {
        let (line, text) = entry?;
        let (item_raw, genres_raw, separator) = match format {
            CatalogFormat::MovieLens1M => {
                let fields: Vec<&str> = text.split(ML_DELIMITER).collect();
                if fields.len() < 3 {
                    return Err(Error::malformed(
                        path,
                        line,
                        "expected MovieID::Title::Genres".to_string(),
                    ));
                }
                (
                    fields[0].trim().to_string(),
                    fields[fields.len() - 1].trim().to_string(),
                    "|",
                )
            }
            CatalogFormat::Delimited(d) => {
                if d.has_header && n == 0 {
                    continue;
                }
                let fields: Vec<&str> = text.split(d.delimiter.as_str()).collect();
                (
                    field(&fields, d.item_column, path, line, "item")?.to_string(),
                    field(&fields, d.genres_column, path, line, "genres")?.to_string(),
                    d.genre_separator.as_str(),
                )
            }
        };
        let item: ItemId = number(&item_raw, path, line, "item id")?;
        let genres: Vec<String> = genres_raw
            .split(separator)
            .map(str::trim)
            .filter(|g| !g.is_empty())
            .map(str::to_string)
            .collect();
        if genres.is_empty() {
            return Err(Error::malformed(path, line, format!("item {item} has no genres")));
        }
        entries.push((item, genres));
    }
    if entries.is_empty() {
        return Err(Error::EmptyDataset);
    }
    ItemCatalog::new(entries)
}

/// Reads a MovieLens users file, `UserID::Gender::Age::Occupation::Zip`.
pub fn parse_demographics(path: &Path) -> Result<UserDemographics> {
    let mut demographics = UserDemographics::default();
    for entry in lines(path)? {
        let (line, text) = entry?;
        let fields: Vec<&str> = text.split(ML_DELIMITER).collect();
        if fields.len() < 2 {
            return Err(Error::malformed(path, line, "expected UserID::Gender::..."));
        }
        let user = number(fields[0].trim(), path, line, "user id")?;
        let gender = Gender::from_code(fields[1]);
        if gender == Gender::Unknown {
            demographics.unknown_codes += 1;
        }
        demographics.gender.insert(user, gender);
    }
    if demographics.unknown_codes > 0 {
        demographics.warnings.push(format!(
            "{} users have an unrecognised gender code",
            demographics.unknown_codes
        ));
    }
    if demographics.gender.is_empty() {
        demographics.warnings.push("demographics file is empty".to_string());
    }
    Ok(demographics)
}
