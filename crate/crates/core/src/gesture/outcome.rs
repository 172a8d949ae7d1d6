use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

use super::{open, read_records, validate_case_id};

/// Binary clinical outcome. `Good` is coded 1, `Poor` 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Poor = 0,
    Good = 1,
}

impl Outcome {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Outcome::Poor),
            1 => Some(Outcome::Good),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Case id to outcome, iterated in case-id order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutcomeTable {
    entries: BTreeMap<String, Outcome>,
}

impl OutcomeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, case_id: impl Into<String>, outcome: Outcome) -> Result<()> {
        let case_id = case_id.into();
        validate_case_id(&case_id)?;
        if self.entries.insert(case_id.clone(), outcome).is_some() {
            return Err(Error::validation(format!("duplicate case id {case_id:?}")));
        }
        Ok(())
    }

    pub fn get(&self, case_id: &str) -> Option<Outcome> {
        self.entries.get(case_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Outcome)> + '_ {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `(poor, good)` counts.
    pub fn counts(&self) -> (usize, usize) {
        let good = self.entries.values().filter(|&&o| o == Outcome::Good).count();
        (self.entries.len() - good, good)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("case_id,outcome\n");
        for (id, o) in &self.entries {
            out.push_str(&format!("{id},{}\n", o.code()));
        }
        out
    }
}

impl FromIterator<(String, Outcome)> for OutcomeTable {
    fn from_iter<I: IntoIterator<Item = (String, Outcome)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

pub fn parse_outcome_table(path: &Path) -> Result<OutcomeTable> {
    read_outcome_table(open(path)?, &path.display().to_string())
}

pub fn read_outcome_table<R: Read>(reader: R, context: &str) -> Result<OutcomeTable> {
    let mut table = OutcomeTable::new();
    for (idx, (line, rec)) in read_records(reader, context)?.iter().enumerate() {
        if idx == 0 && rec.iter().eq(["case_id", "outcome"]) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::parse(context, *line, "expected case_id,outcome"));
        }
        let outcome = rec[1]
            .parse::<u8>()
            .ok()
            .and_then(Outcome::from_code)
            .ok_or_else(|| Error::parse(context, *line, format!("outcome must be 0 or 1, got {:?}", &rec[1])))?;
        table
            .insert(&rec[0], outcome)
            .map_err(|e| Error::parse(context, *line, e.to_string()))?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_outcomes() {
        let t = read_outcome_table("case_id,outcome\nb,1\na,0\n".as_bytes(), "t").unwrap();
        assert_eq!(t.counts(), (1, 1));
        assert_eq!(t.get("b"), Some(Outcome::Good));
        assert_eq!(t.to_csv_string(), "case_id,outcome\na,0\nb,1\n");
    }

    #[test]
    fn rejects_non_binary_and_duplicates() {
        assert!(read_outcome_table("a,2\n".as_bytes(), "t").is_err());
        assert!(read_outcome_table("a,1\na,0\n".as_bytes(), "t").is_err());
    }
}
