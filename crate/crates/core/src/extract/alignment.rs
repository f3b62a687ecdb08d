use std::collections::BTreeSet;

use super::ExtractError;

/// Word alignment links `(source index, reference index)`, 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new(links: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            links: links.into_iter().collect(),
        }
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Reference positions linked to source position `i`, ascending.
    pub fn targets(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.links.range((i, 0)..=(i, usize::MAX)).map(|&(_, j)| j)
    }

    pub fn check(&self, src_len: usize, ref_len: usize) -> Result<(), ExtractError> {
        match self
            .links
            .iter()
            .find(|&&(i, j)| i >= src_len || j >= ref_len)
        {
            Some(&(i, j)) => Err(ExtractError::OutOfRange {
                i,
                j,
                src_len,
                ref_len,
            }),
            None => Ok(()),
        }
    }
}

/// Parses whitespace-separated `i-j` pairs.
pub fn load_alignment(text: &str) -> Result<Alignment, ExtractError> {
    let mut links = BTreeSet::new();
    for (position, item) in text.split_whitespace().enumerate() {
        let bad = || ExtractError::Malformed {
            position,
            item: item.to_string(),
        };
        let (i, j) = item.split_once('-').ok_or_else(bad)?;
        let i = i.parse::<usize>().map_err(|_| bad())?;
        let j = j.parse::<usize>().map_err(|_| bad())?;
        links.insert((i, j));
    }
    Ok(Alignment { links })
}
