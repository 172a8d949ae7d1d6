//! Cohort feature matrices and their CSV form (`case_id,<names...>`).

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::gesture::{Outcome, OutcomeTable};

/// Cases x features, rows sorted by case id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    case_ids: Vec<String>,
    names: Vec<String>,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(case_ids: Vec<String>, names: Vec<String>, data: Vec<f64>) -> Result<Self> {
        if data.len() != case_ids.len() * names.len() {
            return Err(Error::validation(format!(
                "{} values for {} cases x {} features",
                data.len(),
                case_ids.len(),
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::validation(format!("duplicate feature name {dup:?}")));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite value for case {:?}, feature {:?}",
                case_ids[i / names.len()],
                names[i % names.len()]
            )));
        }
        let mut order: Vec<usize> = (0..case_ids.len()).collect();
        order.sort_by(|&a, &b| case_ids[a].cmp(&case_ids[b]));
        if let Some(w) = order.windows(2).find(|w| case_ids[w[0]] == case_ids[w[1]]) {
            return Err(Error::validation(format!("duplicate case id {:?}", case_ids[w[0]])));
        }
        let width = names.len();
        let mut sorted = Vec::with_capacity(data.len());
        for &r in &order {
            sorted.extend_from_slice(&data[r * width..(r + 1) * width]);
        }
        let case_ids = order.iter().map(|&r| case_ids[r].clone()).collect();
        Ok(Self {
            case_ids,
            names,
            data: sorted,
        })
    }

    /// Stacks feature vectors that share one schema.
    pub fn from_vectors(vectors: &[FeatureVector]) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::validation("no feature vectors"));
        };
        let names = first.names().to_vec();
        let mut data = Vec::with_capacity(vectors.len() * names.len());
        for v in vectors {
            if v.names() != names.as_slice() {
                return Err(Error::validation(format!(
                    "{}: feature names differ from {}",
                    v.case_id, first.case_id
                )));
            }
            data.extend_from_slice(v.values());
        }
        Self::new(vectors.iter().map(|v| v.case_id.clone()).collect(), names, data)
    }

    pub fn n_cases(&self) -> usize {
        self.case_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn case_ids(&self) -> &[String] {
        &self.case_ids
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, case: usize) -> &[f64] {
        let w = self.names.len();
        &self.data[case * w..(case + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks(self.names.len().max(1))
    }

    pub fn column(&self, feature: usize) -> Vec<f64> {
        self.rows().map(|r| r[feature]).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "case_id")?;
        for n in &self.names {
            write!(w, ",{n}")?;
        }
        writeln!(w)?;
        for (id, row) in self.case_ids.iter().zip(self.rows()) {
            write!(w, "{id}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_from<R: Read>(reader: R, context: &str) -> Result<Self> {
        let records = crate::gesture::read_records(reader, context)?;
        let Some(((_, header), body)) = records.split_first() else {
            return Err(Error::parse(context, 1, "missing header"));
        };
        if header.get(0) != Some("case_id") {
            return Err(Error::parse(context, 1, "first column must be case_id"));
        }
        let names: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut case_ids = Vec::with_capacity(body.len());
        let mut data = Vec::with_capacity(body.len() * names.len());
        for (line, rec) in body {
            if rec.len() != names.len() + 1 {
                return Err(Error::parse(
                    context,
                    *line,
                    format!("expected {} fields, found {}", names.len() + 1, rec.len()),
                ));
            }
            case_ids.push(rec[0].to_string());
            for (field, name) in rec.iter().skip(1).zip(&names) {
                data.push(crate::gesture::parse_f64(field, context, *line, name)?);
            }
        }
        Self::new(case_ids, names, data)
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read_from(crate::gesture::open(path)?, &path.display().to_string())
    }
}

/// Minimum cases per outcome group.
pub const MIN_GROUP_SIZE: usize = 2;

/// A feature matrix with an outcome per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    matrix: FeatureMatrix,
    outcomes: Vec<Outcome>,
}

impl LabeledMatrix {
    /// Aligns outcomes to rows by case id. Every case needs an outcome and
    /// both groups need at least [`MIN_GROUP_SIZE`] cases.
    pub fn new(matrix: FeatureMatrix, table: &OutcomeTable) -> Result<Self> {
        let outcomes = matrix
            .case_ids()
            .iter()
            .map(|id| {
                table
                    .get(id)
                    .ok_or_else(|| Error::validation(format!("no outcome for case {id:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(matrix, outcomes)
    }

    pub fn from_parts(matrix: FeatureMatrix, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.len() != matrix.n_cases() {
            return Err(Error::validation("one outcome per case is required"));
        }
        let good = outcomes.iter().filter(|&&o| o == Outcome::Good).count();
        let poor = outcomes.len() - good;
        if good < MIN_GROUP_SIZE || poor < MIN_GROUP_SIZE {
            return Err(Error::validation(format!(
                "need at least {MIN_GROUP_SIZE} cases per outcome, have {poor} poor and {good} good"
            )));
        }
        Ok(Self { matrix, outcomes })
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    /// `(poor, good)` values of one feature.
    pub fn split(&self, feature: usize) -> (Vec<f64>, Vec<f64>) {
        let mut poor = Vec::new();
        let mut good = Vec::new();
        for (row, o) in self.matrix.rows().zip(&self.outcomes) {
            match o {
                Outcome::Poor => poor.push(row[feature]),
                Outcome::Good => good.push(row[feature]),
            }
        }
        (poor, good)
    }

    /// Rows restricted to the given case indices.
    pub fn subset(&self, cases: &[usize]) -> Result<Self> {
        let ids = cases.iter().map(|&i| self.matrix.case_ids[i].clone()).collect();
        let mut data = Vec::with_capacity(cases.len() * self.matrix.n_features());
        for &i in cases {
            data.extend_from_slice(self.matrix.row(i));
        }
        let matrix = FeatureMatrix::new(ids, self.matrix.names.clone(), data)?;
        // rows may have been reordered by case id
        let outcomes = matrix
            .case_ids()
            .iter()
            .map(|id| {
                let i = self.matrix.case_ids.binary_search(id).expect("case from this matrix");
                self.outcomes[i]
            })
            .collect();
        Ok(Self { matrix, outcomes })
    }
}
