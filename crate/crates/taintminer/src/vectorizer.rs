//! Feature assembly: bags of words and flow counts into one matrix.
//!
//! Token columns come from a shared vocabulary (tokens seen in at least
//! `min_apps` different apps, sorted), followed by the six flow-category
//! columns. Rows are sorted by app name. The CSV layout is positional:
//!
//! ```text
//! app,label,<token columns...>,Sc_Sn,eSc_Sn,Sc_eSn,eSc_eSn,Sn_C,eSn_C
//! ```
//!
//! The first column is the app name, the second its label (empty when
//! unlabeled), and the last six are always the flow counts, whatever the
//! token columns happen to be called.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::flowsminer::MinerReport;
use crate::lexer::BagOfWords;
use crate::taintmodel::{FlowCategory, Label};

/// Number of apps a token must appear in to earn a column.
pub const DEFAULT_MIN_APPS: usize = 5;

#[derive(Debug, Error)]
pub enum VectorizeError {
    #[error("empty corpus: no apps to vectorize")]
    EmptyCorpus,
    #[error("app sets out of step: {app} present in {present}, missing from {missing}")]
    AppSetMismatch {
        app: String,
        present: &'static str,
        missing: &'static str,
    },
    #[error("feature csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature csv header: expected the six flow columns last, found {found:?}")]
    BadHeader { found: Vec<String> },
    #[error("feature csv row {row}: {problem}")]
    BadRow { row: usize, problem: String },
}

/// Token columns shared across a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
}

impl Vocabulary {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Builds the shared vocabulary: tokens kept when they occur in at least
/// `min_apps` distinct apps, in sorted order.
pub fn build_vocabulary<'a, I>(bags: I, min_apps: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a BagOfWords>,
{
    let mut support: BTreeMap<&str, usize> = BTreeMap::new();
    for bag in bags {
        for token in bag.keys() {
            *support.entry(token).or_default() += 1;
        }
    }
    Vocabulary {
        tokens: support
            .into_iter()
            .filter(|&(_, n)| n >= min_apps)
            .map(|(t, _)| t.to_owned())
            .collect(),
    }
}

/// One app's token counts laid out along the vocabulary.
pub fn token_vector(bag: &BagOfWords, vocab: &Vocabulary) -> Vec<u64> {
    vocab
        .tokens
        .iter()
        .map(|t| bag.get(t).copied().unwrap_or(0))
        .collect()
}

/// One app's flow-category counts in column order.
pub fn flow_vector(report: &MinerReport) -> [u64; 6] {
    report.flow_counts()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub app: String,
    pub label: Option<Label>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    /// Count of feature columns (tokens plus the six flow counts).
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// The same matrix without the six flow columns.
    pub fn without_flow_columns(&self) -> FeatureMatrix {
        let keep = self.columns.len().saturating_sub(FlowCategory::ALL.len());
        FeatureMatrix {
            columns: self.columns[..keep].to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    app: r.app.clone(),
                    label: r.label,
                    values: r.values[..keep].to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_csv<W: Write>(&self, out: W) -> Result<(), VectorizeError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(self.columns.len() + 2);
        header.push("app".to_owned());
        header.push("label".to_owned());
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = Vec::with_capacity(row.values.len() + 2);
            rec.push(row.app.clone());
            rec.push(row.label.map(|l| l.to_string()).unwrap_or_default());
            for v in &row.values {
                rec.push(render_value(*v));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn from_csv<R: Read>(input: R) -> Result<Self, VectorizeError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = r.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(VectorizeError::EmptyCorpus),
        };
        let cols: Vec<String> = header.iter().map(str::to_owned).collect();
        if cols.len() < 2 + FlowCategory::ALL.len()
            || cols[0] != "app"
            || cols[1] != "label"
            || !cols[cols.len() - FlowCategory::ALL.len()..]
                .iter()
                .zip(FlowCategory::ALL)
                .all(|(c, f)| c == f.label())
        {
            return Err(VectorizeError::BadHeader { found: cols });
        }
        let columns: Vec<String> = cols[2..].to_vec();
        let mut rows = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            let row_no = i + 2;
            if rec.len() != columns.len() + 2 {
                return Err(VectorizeError::BadRow {
                    row: row_no,
                    problem: format!(
                        "expected {} fields, found {}",
                        columns.len() + 2,
                        rec.len()
                    ),
                });
            }
            let label = match &rec[1] {
                "" => None,
                text => Some(text.parse().map_err(|_| VectorizeError::BadRow {
                    row: row_no,
                    problem: format!("unknown label {text:?}"),
                })?),
            };
            let values = rec
                .iter()
                .skip(2)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| VectorizeError::BadRow {
                        row: row_no,
                        problem: format!("bad number {v:?}"),
                    })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(FeatureRow {
                app: rec[0].to_owned(),
                label,
                values,
            });
        }
        Ok(FeatureMatrix { columns, rows })
    }
}

fn render_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 9e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Assembles the feature matrix for a corpus. `bags` and `reports` must
/// cover the same apps; `labels`, when given, must cover them too.
pub fn assemble(
    bags: &BTreeMap<String, BagOfWords>,
    reports: &BTreeMap<String, MinerReport>,
    labels: Option<&BTreeMap<String, Label>>,
    min_apps: usize,
) -> Result<FeatureMatrix, VectorizeError> {
    if bags.is_empty() {
        return Err(VectorizeError::EmptyCorpus);
    }
    check_same_apps(bags.keys(), reports.keys(), "bags", "mined reports")?;
    check_same_apps(reports.keys(), bags.keys(), "mined reports", "bags")?;
    if let Some(labels) = labels {
        check_same_apps(bags.keys(), labels.keys(), "bags", "labels")?;
    }

    let vocab = build_vocabulary(bags.values(), min_apps);
    let mut columns = vocab.tokens.clone();
    columns.extend(FlowCategory::ALL.iter().map(|c| c.label().to_owned()));

    let rows = bags
        .iter()
        .map(|(app, bag)| {
            let mut values: Vec<f64> = token_vector(bag, &vocab)
                .into_iter()
                .map(|v| v as f64)
                .collect();
            values.extend(flow_vector(&reports[app]).into_iter().map(|v| v as f64));
            FeatureRow {
                app: app.clone(),
                label: labels.map(|l| l[app]),
                values,
            }
        })
        .collect();

    Ok(FeatureMatrix { columns, rows })
}

fn check_same_apps<'a, A, B>(
    have: A,
    other: B,
    present: &'static str,
    missing: &'static str,
) -> Result<(), VectorizeError>
where
    A: IntoIterator<Item = &'a String>,
    B: IntoIterator<Item = &'a String>,
{
    let other: std::collections::BTreeSet<&String> = other.into_iter().collect();
    for app in have {
        if !other.contains(app) {
            return Err(VectorizeError::AppSetMismatch {
                app: app.clone(),
                present,
                missing,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowsminer::mine;
    use crate::preprocessor::{normalize, RawSource};
    use crate::taintmodel::SinkSet;

    fn bag(pairs: &[(&str, u64)]) -> BagOfWords {
        pairs.iter().map(|&(t, n)| (t.to_owned(), n)).collect()
    }

    #[test]
    fn vocabulary_keeps_tokens_with_enough_support() {
        let bags = vec![
            bag(&[("alpha", 3), ("rare", 1)]),
            bag(&[("alpha", 1)]),
            bag(&[("alpha", 2), ("beta", 1)]),
        ];
        let vocab = build_vocabulary(&bags, 2);
        assert_eq!(vocab.tokens(), ["alpha"]);
        let vocab = build_vocabulary(&bags, 1);
        assert_eq!(vocab.tokens(), ["alpha", "beta", "rare"]);
    }

    #[test]
    fn vocabulary_is_sorted() {
        let bags = vec![bag(&[("zeta", 1), ("aStr", 4), ("(", 2)])];
        let vocab = build_vocabulary(&bags, 1);
        assert_eq!(vocab.tokens(), ["(", "aStr", "zeta"]);
    }

    #[test]
    fn token_vector_fills_missing_with_zero() {
        let bags = vec![bag(&[("a", 2), ("b", 1)]), bag(&[("b", 5)])];
        let vocab = build_vocabulary(&bags, 1);
        assert_eq!(token_vector(&bags[0], &vocab), [2, 1]);
        assert_eq!(token_vector(&bags[1], &vocab), [0, 5]);
    }

    fn tiny_corpus() -> (BTreeMap<String, BagOfWords>, BTreeMap<String, MinerReport>) {
        let sinks = SinkSet::default_set();
        let apps = [
            (
                "one",
                "preferences {\n  input(\"phone\", \"phone\")\n}\ndef go() {\n  sendSms(phone)\n}\n",
            ),
            ("two", "def go() {\n  log.debug \"quiet\"\n}\n"),
        ];
        let mut bags = BTreeMap::new();
        let mut reports = BTreeMap::new();
        for (name, text) in apps {
            let src = normalize(&RawSource::from_text(name, text)).unwrap();
            let lines = crate::lexer::tokenize(&src);
            let split = crate::lexer::split_methods(&lines);
            bags.insert(name.to_owned(), crate::lexer::bag_of_words(&split.methods));
            reports.insert(name.to_owned(), mine(&src, &sinks));
        }
        (bags, reports)
    }

    #[test]
    fn assemble_layout_and_counts() {
        let (bags, reports) = tiny_corpus();
        let labels: BTreeMap<String, Label> = [
            ("one".to_owned(), Label::Vulnerable),
            ("two".to_owned(), Label::NonVulnerable),
        ]
        .into();
        let m = assemble(&bags, &reports, Some(&labels), 1).unwrap();

        let n = m.columns.len();
        assert_eq!(
            &m.columns[n - 6..],
            ["Sc_Sn", "eSc_Sn", "Sc_eSn", "eSc_eSn", "Sn_C", "eSn_C"]
        );
        assert!(m.columns[..n - 6].iter().any(|c| c == "go"));
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.rows[0].app, "one");
        assert_eq!(&m.rows[0].values[n - 6..], [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(&m.rows[1].values[n - 6..], [0.0; 6]);
        assert_eq!(m.rows[0].label, Some(Label::Vulnerable));
    }

    #[test]
    fn shared_vocabulary_needs_support_in_both_apps() {
        let (bags, reports) = tiny_corpus();
        let m = assemble(&bags, &reports, None, 2).unwrap();
        assert!(m.columns.iter().any(|c| c == "go"));
        assert!(!m.columns.iter().any(|c| c == "sendSms"));
    }

    #[test]
    fn csv_round_trip_preserves_everything() {
        let (bags, reports) = tiny_corpus();
        let labels: BTreeMap<String, Label> = [
            ("one".to_owned(), Label::Vulnerable),
            ("two".to_owned(), Label::NonVulnerable),
        ]
        .into();
        let m = assemble(&bags, &reports, Some(&labels), 1).unwrap();
        let mut buf = Vec::new();
        m.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("app,label,"));
        assert!(text.contains(",Sc_Sn,eSc_Sn,Sc_eSn,eSc_eSn,Sn_C,eSn_C\n"));
        assert!(text.contains("one,vulnerable,"));

        let back = FeatureMatrix::from_csv(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn unlabeled_rows_round_trip() {
        let (bags, reports) = tiny_corpus();
        let m = assemble(&bags, &reports, None, 1).unwrap();
        let mut buf = Vec::new();
        m.to_csv(&mut buf).unwrap();
        let back = FeatureMatrix::from_csv(&buf[..]).unwrap();
        assert!(back.rows.iter().all(|r| r.label.is_none()));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let err = assemble(&BTreeMap::new(), &BTreeMap::new(), None, 1).unwrap_err();
        assert!(matches!(err, VectorizeError::EmptyCorpus));
    }

    #[test]
    fn app_set_mismatch_is_rejected() {
        let (bags, mut reports) = tiny_corpus();
        reports.remove("two");
        let err = assemble(&bags, &reports, None, 1).unwrap_err();
        match err {
            VectorizeError::AppSetMismatch { app, .. } => assert_eq!(app, "two"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dropping_flow_columns_keeps_tokens() {
        let (bags, reports) = tiny_corpus();
        let m = assemble(&bags, &reports, None, 1).unwrap();
        let bow = m.without_flow_columns();
        assert_eq!(bow.columns.len(), m.columns.len() - 6);
        assert!(!bow.columns.iter().any(|c| c == "Sc_Sn"));
        assert_eq!(bow.rows[0].values.len(), bow.columns.len());
    }

    #[test]
    fn bad_header_is_rejected() {
        let text = "app,label,x,y\nfoo,,1,2\n";
        let err = FeatureMatrix::from_csv(text.as_bytes()).unwrap_err();
        assert!(matches!(err, VectorizeError::BadHeader { .. }));
    }

    #[test]
    fn ragged_row_is_rejected() {
        let text = "app,label,t,Sc_Sn,eSc_Sn,Sc_eSn,eSc_eSn,Sn_C,eSn_C\nfoo,,1,0,0,0,0,0\n";
        let err = FeatureMatrix::from_csv(text.as_bytes()).unwrap_err();
        match err {
            VectorizeError::BadRow { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
