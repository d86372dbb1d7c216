//! Partitions of appliances into metered blocks, as restricted-growth strings.
//!
//! A restricted-growth string `c` of length N has `c[0] = 0` and
//! `c[k] <= 1 + max(c[..k])`; appliance `k` sits in block `c[k]`. Every set
//! partition has exactly one such code, and enumerating codes in
//! lexicographic order visits each partition once.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Largest N enumerated without a block-count bound (B_15 ~ 1.38e9).
pub const MAX_EXHAUSTIVE: usize = 15;
pub const MAX_APPLIANCES: usize = u8::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    code: Vec<u8>,
    blocks: usize,
}

impl Partition {
    pub fn from_code(code: Vec<u8>) -> Result<Self> {
        if code.is_empty() {
            return Err(Error::InvalidPartition("empty code".into()));
        }
        if code.len() > MAX_APPLIANCES {
            return Err(Error::InvalidPartition(alloc::format!(
                "at most {MAX_APPLIANCES} appliances supported"
            )));
        }
        let mut max = 0u8;
        for (k, &c) in code.iter().enumerate() {
            let ok = if k == 0 { c == 0 } else { c <= max + 1 };
            if !ok {
                return Err(Error::InvalidPartition(alloc::format!(
                    "code {code:?} is not a restricted-growth string at position {k}"
                )));
            }
            max = max.max(c);
        }
        Ok(Partition {
            blocks: max as usize + 1,
            code,
        })
    }

    /// Canonical partition from blocks of 0-based appliance indices.
    pub fn from_blocks(blocks: &[Vec<usize>], n: usize) -> Result<Self> {
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::InvalidPartition(alloc::format!(
                        "appliance {} out of range 1..={n}",
                        i + 1
                    )));
                }
                if owner[i].replace(b).is_some() {
                    return Err(Error::InvalidPartition(alloc::format!(
                        "appliance {} appears in more than one block",
                        i + 1
                    )));
                }
            }
        }
        let owner: Vec<usize> = owner
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                o.ok_or_else(|| Error::InvalidPartition(alloc::format!("appliance {} is in no block", i + 1)))
            })
            .collect::<Result<_>>()?;
        Ok(Self::canonical(&owner))
    }

    /// Relabels arbitrary block labels into restricted-growth form.
    pub fn canonical(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, u8)> = Vec::new();
        let code = labels
            .iter()
            .map(|l| match map.iter().find(|(k, _)| k == l) {
                Some(&(_, c)) => c,
                None => {
                    let c = map.len() as u8;
                    map.push((*l, c));
                    c
                }
            })
            .collect();
        Partition {
            code,
            blocks: map.len(),
        }
    }

    /// Everything behind one meter.
    pub fn single_block(n: usize) -> Self {
        Partition {
            code: vec![0; n],
            blocks: usize::from(n > 0),
        }
    }

    /// One meter per appliance.
    pub fn singletons(n: usize) -> Self {
        Partition {
            code: (0..n).map(|i| i as u8).collect(),
            blocks: n,
        }
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    /// Number of appliances.
    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    /// Number of blocks, i.e. meters.
    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, appliance: usize) -> usize {
        self.code[appliance] as usize
    }

    /// Blocks of 0-based appliance indices, in order of first member.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (i, &c) in self.code.iter().enumerate() {
            out[c as usize].push(i);
        }
        out
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut target: Vec<Option<u8>> = vec![None; self.blocks];
        for (&fine, &coarse) in self.code.iter().zip(&coarser.code) {
            match target[fine as usize] {
                None => target[fine as usize] = Some(coarse),
                Some(t) if t != coarse => return false,
                _ => {}
            }
        }
        true
    }

    /// Code as base-36 digits, e.g. `0102`; dot-separated decimals once
    /// there are more than 36 blocks.
    pub fn code_string(&self) -> String {
        if self.blocks <= 36 {
            return self
                .code
                .iter()
                .filter_map(|&c| char::from_digit(c as u32, 36))
                .collect();
        }
        let parts: Vec<String> = self.code.iter().map(|c| alloc::format!("{c}")).collect();
        parts.join(".")
    }
}

/// `1|2,3`: blocks separated by `|`, 1-based appliance positions.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, block) in self.blocks().iter().enumerate() {
            if b > 0 {
                f.write_str("|")?;
            }
            for (j, i) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", i + 1)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut n = 0;
        for part in s.split('|') {
            let block = part
                .split(',')
                .map(|tok| {
                    let tok = tok.trim();
                    match tok.parse::<usize>() {
                        Ok(i) if i >= 1 => Ok(i - 1),
                        _ => Err(Error::InvalidPartition(alloc::format!(
                            "expected 1-based appliance position, got {tok:?}"
                        ))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            n += block.len();
            blocks.push(block);
        }
        Partition::from_blocks(&blocks, n)
    }
}

/// Bell numbers B_0..=B_n (saturating).
pub fn bell_numbers(n: usize) -> Vec<u64> {
    // Bell triangle
    let mut out = vec![1u64];
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("row is never empty"));
        for &x in &row {
            let prev = *next.last().expect("non-empty");
            next.push(prev.saturating_add(x));
        }
        out.push(next[0]);
        row = next;
    }
    out
}

pub fn bell(n: usize) -> u64 {
    bell_numbers(n)[n]
}

/// Wiring restrictions on which appliances may share a meter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    /// 0-based appliance pairs forced into the same block.
    pub must_link: Vec<(usize, usize)>,
    /// 0-based appliance pairs forced into different blocks.
    pub cannot_link: Vec<(usize, usize)>,
    pub max_meters: Option<usize>,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        self.must_link.is_empty() && self.cannot_link.is_empty() && self.max_meters.is_none()
    }

    /// Checks indices and that no cannot-link pair is joined by the
    /// transitive closure of the must-link pairs.
    pub fn check(&self, n: usize) -> Result<()> {
        for &(a, b) in self.must_link.iter().chain(&self.cannot_link) {
            if a >= n || b >= n {
                return Err(Error::InfeasibleConstraints(alloc::format!(
                    "pair ({}, {}) out of range 1..={n}",
                    a + 1,
                    b + 1
                )));
            }
        }
        if self.max_meters == Some(0) {
            return Err(Error::InfeasibleConstraints("max_meters must be >= 1".into()));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(a, b) in &self.must_link {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        for &(a, b) in &self.cannot_link {
            if find(&mut parent, a) == find(&mut parent, b) {
                return Err(Error::InfeasibleConstraints(alloc::format!(
                    "appliances {} and {} must share a meter and must not",
                    a + 1,
                    b + 1
                )));
            }
        }
        Ok(())
    }

    pub fn allows(&self, p: &Partition) -> bool {
        let code = p.code();
        self.must_link.iter().all(|&(a, b)| code[a] == code[b])
            && self.cannot_link.iter().all(|&(a, b)| code[a] != code[b])
            && self.max_meters.is_none_or(|m| p.block_count() <= m)
    }
}

/// Lexicographic restricted-growth enumeration, optionally capped in block
/// count.
#[derive(Debug, Clone)]
pub struct RgsIter {
    code: Vec<u8>,
    /// `prefix_max[k] = max(code[..=k])`
    prefix_max: Vec<u8>,
    max_blocks: usize,
    started: bool,
    done: bool,
}

impl RgsIter {
    pub fn new(n: usize, max_blocks: usize) -> Self {
        RgsIter {
            code: vec![0; n],
            prefix_max: vec![0; n],
            max_blocks: max_blocks.max(1),
            started: false,
            done: n == 0,
        }
    }

    fn advance(&mut self) -> bool {
        let n = self.code.len();
        // rightmost position that can still grow
        for k in (1..n).rev() {
            let limit = (self.prefix_max[k - 1] as usize + 1).min(self.max_blocks - 1);
            if (self.code[k] as usize) < limit {
                self.code[k] += 1;
                self.prefix_max[k] = self.prefix_max[k - 1].max(self.code[k]);
                for j in k + 1..n {
                    self.code[j] = 0;
                    self.prefix_max[j] = self.prefix_max[k];
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for RgsIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        let blocks = self.prefix_max.last().map_or(0, |&m| m as usize + 1);
        Some(Partition {
            code: self.code.clone(),
            blocks,
        })
    }
}

/// All partitions of `n` appliances allowed by `constraints`, in
/// lexicographic code order.
pub fn enumerate_partitions(
    n: usize,
    constraints: &ConstraintSet,
) -> Result<impl Iterator<Item = Partition> + '_> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one appliance".into()));
    }
    if n > MAX_APPLIANCES {
        return Err(Error::TooManyAppliances { n, limit: MAX_APPLIANCES });
    }
    if n > MAX_EXHAUSTIVE && constraints.max_meters.is_none() {
        return Err(Error::TooManyAppliances { n, limit: MAX_EXHAUSTIVE });
    }
    constraints.check(n)?;
    let max_blocks = constraints.max_meters.unwrap_or(n).min(n);
    Ok(RgsIter::new(n, max_blocks).filter(move |p| constraints.allows(p)))
}
