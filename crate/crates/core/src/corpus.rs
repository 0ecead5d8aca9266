//! Corpus ingestion and persistence: the bundled identity taxonomy, image
//! manifests, and per-image result files.
//!
//! All three file formats are header-first CSV. Result files are written in
//! a canonical sort order with shortest-round-trip float formatting, so a
//! rerun over identical inputs reproduces them byte for byte.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::colorspace::{LabColor, SrgbColor};
use crate::skinmask::CoverageVerdict;
use crate::tonemetrics::ToneMeasure;

/// Bundled taxonomy source, compiled into the library.
const BUNDLED_TAXONOMY: &str = include_str!("data/taxonomy.csv");

/// Default lower bound on images per (model tag, identity) group before a
/// warning is emitted.
pub const DEFAULT_MIN_GROUP: usize = 50;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("row {row}: {field} must not be empty")]
    EmptyField { row: usize, field: &'static str },
    #[error("row {row}: unknown category `{value}`")]
    UnknownCategory { row: usize, value: String },
    #[error("row {row}: unknown verb `{value}` (expected is, has, or does)")]
    UnknownVerb { row: usize, value: String },
    #[error("row {row}: invalid {field} `{value}`")]
    BadValue {
        row: usize,
        field: &'static str,
        value: String,
    },
    #[error("duplicate identity id `{id}`")]
    DuplicateId { id: String },
    #[error("expected {want} identity records, found {got}")]
    RecordCount { want: usize, got: usize },
    #[error("category `{category}` has {got} records, expected {want}")]
    CategorySize {
        category: &'static str,
        got: usize,
        want: usize,
    },
    #[error("identities `{first}` and `{second}` build the same prompt")]
    DuplicatePrompt { first: String, second: String },
    #[error(
        "manifest rejected: {n_unresolved} unresolved identity id(s), \
         {n_missing} missing image file(s)\n{detail}"
    )]
    ManifestInvalid {
        n_unresolved: usize,
        n_missing: usize,
        detail: String,
    },
    #[error("{path} row {row}: {message}")]
    InvalidResults {
        path: PathBuf,
        row: usize,
        message: String,
    },
}

/// Identity grouping labels. The closed set mirrors the bundled taxonomy's
/// category column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Ethnicity,
    Disability,
    Diseases,
    DrugUse,
    Education,
    PhysicalTraits,
    MentalIllness,
    Profession,
    Religion,
    Sexuality,
    SocioeconomicStatus,
    Other,
    NoStigma,
}

impl Category {
    /// Declaration order is the canonical report order.
    pub const ALL: [Category; 13] = [
        Category::Ethnicity,
        Category::Disability,
        Category::Diseases,
        Category::DrugUse,
        Category::Education,
        Category::PhysicalTraits,
        Category::MentalIllness,
        Category::Profession,
        Category::Religion,
        Category::Sexuality,
        Category::SocioeconomicStatus,
        Category::Other,
        Category::NoStigma,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Ethnicity => "Ethnicity",
            Category::Disability => "Disability",
            Category::Diseases => "Diseases",
            Category::DrugUse => "Drug Use",
            Category::Education => "Education",
            Category::PhysicalTraits => "Physical Traits",
            Category::MentalIllness => "Mental Illness",
            Category::Profession => "Profession",
            Category::Religion => "Religion",
            Category::Sexuality => "Sexuality",
            Category::SocioeconomicStatus => "Socioeconomic Status",
            Category::Other => "Other",
            Category::NoStigma => "No Stigma",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    /// Every category except the No Stigma control group.
    pub fn is_stigmatized(&self) -> bool {
        !matches!(self, Category::NoStigma)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verb slot of the prompt template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verb {
    Is,
    Has,
    Does,
}

impl Verb {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verb::Is => "is",
            Verb::Has => "has",
            Verb::Does => "does",
        }
    }

    pub fn parse(s: &str) -> Option<Verb> {
        match s {
            "is" => Some(Verb::Is),
            "has" => Some(Verb::Has),
            "does" => Some(Verb::Does),
            _ => None,
        }
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One taxonomy row: a labeled identity plus the pieces of its prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityRecord {
    pub id: String,
    pub display_name: String,
    pub category: Category,
    pub verb: Verb,
}

impl IdentityRecord {
    pub fn prompt(&self) -> String {
        build_prompt(self)
    }
}

/// Instantiates the generation prompt for a record. The control record
/// (category No Stigma) drops the identity clause entirely.
pub fn build_prompt(rec: &IdentityRecord) -> String {
    if rec.category == Category::NoStigma {
        "a full color, front-facing photo of a person, neutral background, daylight".to_string()
    } else {
        format!(
            "a full color, front-facing photo of a person who {} {}, neutral background, daylight",
            rec.verb.as_str(),
            rec.display_name
        )
    }
}

/// Expected category sizes for a valid taxonomy, in report order.
const EXPECTED_SIZES: [(Category, usize); 13] = [
    (Category::Ethnicity, 7),
    (Category::Disability, 11),
    (Category::Diseases, 20),
    (Category::DrugUse, 5),
    (Category::Education, 1),
    (Category::PhysicalTraits, 12),
    (Category::MentalIllness, 6),
    (Category::Profession, 3),
    (Category::Religion, 4),
    (Category::Sexuality, 3),
    (Category::SocioeconomicStatus, 1),
    (Category::Other, 20),
    (Category::NoStigma, 1),
];

const EXPECTED_TOTAL: usize = 94;

/// Validated identity list with id lookup.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    records: Vec<IdentityRecord>,
    index: HashMap<String, usize>,
}

impl Taxonomy {
    /// The taxonomy compiled into the library. The file is validated by the
    /// test suite, so a parse failure here is a build defect.
    pub fn bundled() -> Taxonomy {
        Taxonomy::from_reader(BUNDLED_TAXONOMY.as_bytes(), Path::new("<bundled>"))
            .expect("bundled taxonomy is valid")
    }

    pub fn from_path(path: &Path) -> Result<Taxonomy, CorpusError> {
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Taxonomy::from_reader(BufReader::new(file), path)
    }

    /// Parses and fully validates a taxonomy: closed category/verb sets,
    /// unique ids, the exact per-category record counts, and prompt
    /// injectivity.
    pub fn from_reader<R: Read>(reader: R, path: &Path) -> Result<Taxonomy, CorpusError> {
        let mut csv_reader = csv::Reader::from_reader(reader);
        let headers = csv_reader
            .headers()
            .map_err(|source| CorpusError::Csv {
                path: path.to_path_buf(),
                source,
            })?
            .clone();
        let col = |name: &'static str| -> Result<usize, CorpusError> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or(CorpusError::MissingColumn {
                    path: path.to_path_buf(),
                    column: name,
                })
        };
        let (c_id, c_name, c_cat, c_verb) = (
            col("id")?,
            col("display_name")?,
            col("category")?,
            col("verb")?,
        );

        let mut records = Vec::new();
        for (i, row) in csv_reader.records().enumerate() {
            let row = row.map_err(|source| CorpusError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let row_no = i + 2; // header is row 1
            let field = |idx: usize| row.get(idx).unwrap_or("").trim().to_string();
            let id = field(c_id);
            let display_name = field(c_name);
            let category_raw = field(c_cat);
            let verb_raw = field(c_verb);
            if id.is_empty() {
                return Err(CorpusError::EmptyField {
                    row: row_no,
                    field: "id",
                });
            }
            if display_name.is_empty() {
                return Err(CorpusError::EmptyField {
                    row: row_no,
                    field: "display_name",
                });
            }
            let category =
                Category::parse(&category_raw).ok_or_else(|| CorpusError::UnknownCategory {
                    row: row_no,
                    value: category_raw.clone(),
                })?;
            let verb = Verb::parse(&verb_raw).ok_or_else(|| CorpusError::UnknownVerb {
                row: row_no,
                value: verb_raw.clone(),
            })?;
            records.push(IdentityRecord {
                id,
                display_name,
                category,
                verb,
            });
        }

        let mut index = HashMap::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            if index.insert(rec.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId { id: rec.id.clone() });
            }
        }
        if records.len() != EXPECTED_TOTAL {
            return Err(CorpusError::RecordCount {
                want: EXPECTED_TOTAL,
                got: records.len(),
            });
        }
        for &(category, want) in &EXPECTED_SIZES {
            let got = records.iter().filter(|r| r.category == category).count();
            if got != want {
                return Err(CorpusError::CategorySize {
                    category: category.as_str(),
                    got,
                    want,
                });
            }
        }
        let mut prompts: HashMap<String, &str> = HashMap::with_capacity(records.len());
        for rec in &records {
            if let Some(first) = prompts.insert(rec.prompt(), &rec.id) {
                return Err(CorpusError::DuplicatePrompt {
                    first: first.to_string(),
                    second: rec.id.clone(),
                });
            }
        }

        Ok(Taxonomy { records, index })
    }

    pub fn get(&self, id: &str) -> Option<&IdentityRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[IdentityRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record counts per category, in canonical report order.
    pub fn category_sizes(&self) -> Vec<(Category, usize)> {
        Category::ALL
            .iter()
            .map(|&c| {
                (
                    c,
                    self.records.iter().filter(|r| r.category == c).count(),
                )
            })
            .collect()
    }
}

/// One manifest row. Paths are resolved against the manifest's directory;
/// `source` keeps the image path exactly as the manifest wrote it, so
/// downstream reports stay relative and machine-independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_path: PathBuf,
    pub source: String,
    pub identity_id: String,
    pub model_tag: String,
    pub mask_path: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Manifest parse outcome: validated entries plus human-readable warnings
/// (small groups, empty manifest).
#[derive(Debug, Clone)]
pub struct ManifestLoad {
    pub entries: Vec<ManifestEntry>,
    pub warnings: Vec<String>,
}

fn resolve(base: Option<&Path>, raw: &str) -> PathBuf {
    let p = Path::new(raw);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

/// Loads a manifest and checks every row against the taxonomy and the
/// filesystem. Unresolved identity ids and missing image files are
/// collected across all rows and reported in one batch error.
pub fn load_manifest(
    path: &Path,
    taxonomy: &Taxonomy,
    min_group: usize,
) -> Result<ManifestLoad, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|source| CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let col = |name: &'static str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(CorpusError::MissingColumn {
                path: path.to_path_buf(),
                column: name,
            })
    };
    let c_image = col("image_path")?;
    let c_identity = col("identity_id")?;
    let c_tag = col("model_tag")?;
    // Optional columns: absent entirely is the same as always-empty.
    let c_mask = headers.iter().position(|h| h == "mask_path");
    let c_seed = headers.iter().position(|h| h == "seed");

    let base = path.parent();
    let mut entries = Vec::new();
    let mut unresolved: Vec<String> = Vec::new();
    let mut missing: Vec<String> = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|source| CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row_no = i + 2;
        let field = |idx: usize| row.get(idx).unwrap_or("").trim().to_string();
        let image_raw = field(c_image);
        if image_raw.is_empty() {
            return Err(CorpusError::EmptyField {
                row: row_no,
                field: "image_path",
            });
        }
        let identity_id = field(c_identity);
        if identity_id.is_empty() {
            return Err(CorpusError::EmptyField {
                row: row_no,
                field: "identity_id",
            });
        }
        let model_tag = field(c_tag);
        let mask_raw = c_mask.map(field).unwrap_or_default();
        let seed_raw = c_seed.map(field).unwrap_or_default();

        if taxonomy.get(&identity_id).is_none() {
            unresolved.push(format!("row {row_no}: `{identity_id}`"));
        }
        let image_path = resolve(base, &image_raw);
        if !image_path.is_file() {
            missing.push(format!("row {row_no}: {}", image_path.display()));
        }
        let mask_path = if mask_raw.is_empty() {
            None
        } else {
            Some(resolve(base, &mask_raw))
        };
        let seed = if seed_raw.is_empty() {
            None
        } else {
            Some(
                seed_raw
                    .parse::<u64>()
                    .map_err(|_| CorpusError::BadValue {
                        row: row_no,
                        field: "seed",
                        value: seed_raw.clone(),
                    })?,
            )
        };
        entries.push(ManifestEntry {
            image_path,
            source: image_raw,
            identity_id,
            model_tag,
            mask_path,
            seed,
        });
    }

    if !unresolved.is_empty() || !missing.is_empty() {
        let mut detail = String::new();
        if !unresolved.is_empty() {
            detail.push_str("unresolved identity ids:\n");
            for line in &unresolved {
                detail.push_str("  ");
                detail.push_str(line);
                detail.push('\n');
            }
        }
        if !missing.is_empty() {
            detail.push_str("missing image files:\n");
            for line in &missing {
                detail.push_str("  ");
                detail.push_str(line);
                detail.push('\n');
            }
        }
        return Err(CorpusError::ManifestInvalid {
            n_unresolved: unresolved.len(),
            n_missing: missing.len(),
            detail,
        });
    }

    let mut warnings = Vec::new();
    if entries.is_empty() {
        warnings.push(format!("manifest {} contains no entries", path.display()));
    }
    let mut groups: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for e in &entries {
        *groups
            .entry((e.model_tag.as_str(), e.identity_id.as_str()))
            .or_default() += 1;
    }
    for ((tag, id), n) in groups {
        if n < min_group {
            warnings.push(format!(
                "group ({tag}, {id}) has {n} image(s), fewer than the minimum of {min_group}"
            ));
        }
    }
    Ok(ManifestLoad { entries, warnings })
}

/// Per-image pipeline outcome. `tone` is present exactly when the coverage
/// verdict retained the image.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub model_tag: String,
    pub identity_id: String,
    pub image_path: String,
    pub verdict: CoverageVerdict,
    pub tone: Option<ToneMeasure>,
    pub k: usize,
    pub seed: u64,
}

const RESULT_COLUMNS: [&str; 15] = [
    "model_tag",
    "identity_id",
    "image_path",
    "coverage",
    "retained",
    "L",
    "h",
    "C",
    "lab_L",
    "lab_a",
    "lab_b",
    "preview_hex",
    "n_pixels",
    "k",
    "seed",
];

fn sort_key(r: &ResultRecord) -> (&str, &str, &str) {
    (&r.model_tag, &r.identity_id, &r.image_path)
}

/// Writes results as CSV in canonical (model_tag, identity_id, image_path)
/// order. Floats use Rust's shortest round-trip formatting, so identical
/// inputs produce byte-identical files.
pub fn persist_results(records: &[ResultRecord], path: &Path) -> Result<(), CorpusError> {
    let io_err = |source: std::io::Error| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |source: csv::Error| CorpusError::Csv {
        path: path.to_path_buf(),
        source,
    };
    writer.write_record(RESULT_COLUMNS).map_err(csv_err)?;

    let mut order: Vec<&ResultRecord> = records.iter().collect();
    order.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
    for r in order {
        debug_assert_eq!(r.tone.is_some(), r.verdict.retained);
        let mut row: Vec<String> = vec![
            r.model_tag.clone(),
            r.identity_id.clone(),
            r.image_path.clone(),
            r.verdict.coverage.to_string(),
            r.verdict.retained.to_string(),
        ];
        match &r.tone {
            Some(t) => row.extend([
                t.l.to_string(),
                t.h.to_string(),
                t.c.to_string(),
                t.lab.l.to_string(),
                t.lab.a.to_string(),
                t.lab.b.to_string(),
                t.preview.hex(),
                t.n_pixels.to_string(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 8)),
        }
        row.push(r.k.to_string());
        row.push(r.seed.to_string());
        writer.write_record(&row).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}

/// Reads a results file back into records. Inverse of `persist_results`:
/// a persist/load round trip is structurally exact, floats included.
pub fn load_results(path: &Path) -> Result<Vec<ResultRecord>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader
        .headers()
        .map_err(|source| CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let col = |name: &'static str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or(CorpusError::MissingColumn {
                path: path.to_path_buf(),
                column: name,
            })
    };
    let mut cols = [0usize; 15];
    for (i, name) in RESULT_COLUMNS.iter().enumerate() {
        cols[i] = col(name)?;
    }

    let bad = |row: usize, message: String| CorpusError::InvalidResults {
        path: path.to_path_buf(),
        row,
        message,
    };
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|source| CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row_no = i + 2;
        let field = |slot: usize| row.get(cols[slot]).unwrap_or("").to_string();
        let parse_f64 = |slot: usize, name: &str| -> Result<f64, CorpusError> {
            field(slot)
                .parse::<f64>()
                .map_err(|_| bad(row_no, format!("invalid {name} `{}`", field(slot))))
        };
        let retained = match field(4).as_str() {
            "true" => true,
            "false" => false,
            other => return Err(bad(row_no, format!("invalid retained `{other}`"))),
        };
        let verdict = CoverageVerdict {
            coverage: parse_f64(3, "coverage")?,
            retained,
        };
        let tone = if retained {
            let lab = LabColor::new(
                parse_f64(8, "lab_L")?,
                parse_f64(9, "lab_a")?,
                parse_f64(10, "lab_b")?,
            );
            let preview = SrgbColor::from_hex(&field(11))
                .ok_or_else(|| bad(row_no, format!("invalid preview_hex `{}`", field(11))))?;
            let n_pixels = field(12)
                .parse::<u64>()
                .map_err(|_| bad(row_no, format!("invalid n_pixels `{}`", field(12))))?;
            Some(ToneMeasure {
                l: parse_f64(5, "L")?,
                h: parse_f64(6, "h")?,
                c: parse_f64(7, "C")?,
                lab,
                preview,
                n_pixels,
            })
        } else {
            None
        };
        let k = field(13)
            .parse::<usize>()
            .map_err(|_| bad(row_no, format!("invalid k `{}`", field(13))))?;
        let seed = field(14)
            .parse::<u64>()
            .map_err(|_| bad(row_no, format!("invalid seed `{}`", field(14))))?;
        records.push(ResultRecord {
            model_tag: field(0),
            identity_id: field(1),
            image_path: field(2),
            verdict,
            tone,
            k,
            seed,
        });
    }
    Ok(records)
}
