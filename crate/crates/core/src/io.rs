//! File formats: network JSON, headerless matrix CSV and single-column
//! vector CSV.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netgraph::{build_graph, Edge, NodeId, NodeSet, WeightedDigraph};

/// On-disk network: `{"n", "edges": [[from, to, weight]], "sources", "targets"}`
/// with optional planar `"positions"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub n: usize,
    pub edges: Vec<(NodeId, NodeId, f64)>,
    pub sources: Vec<NodeId>,
    pub targets: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

impl NetworkFile {
    pub fn from_graph(g: &WeightedDigraph, sources: &NodeSet, targets: &NodeSet) -> Self {
        Self {
            n: g.n(),
            edges: g.edges().iter().map(|e| (e.from, e.to, e.weight)).collect(),
            sources: sources.as_slice().to_vec(),
            targets: targets.as_slice().to_vec(),
            positions: g.positions().map(<[_]>::to_vec),
        }
    }

    /// Validated graph plus source and target sets.
    pub fn into_parts(self) -> Result<(WeightedDigraph, NodeSet, NodeSet)> {
        let edges = self.edges.into_iter().map(|(f, t, w)| Edge::new(f, t, w)).collect();
        let mut g = build_graph(self.n, edges)?;
        if let Some(p) = self.positions {
            g = g.with_positions(p)?;
        }
        let sources = NodeSet::new(self.sources);
        let targets = NodeSet::new(self.targets);
        sources.validate(self.n)?;
        targets.validate(self.n)?;
        Ok((g, sources, targets))
    }

    pub fn read(r: impl std::io::Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    /// Pretty JSON. Floats use the shortest representation that round-trips
    /// to the same bits.
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_matrix_csv(mut w: impl Write, m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_rows_csv(mut w: impl Write, rows: &[Vec<f64>]) -> Result<()> {
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

fn parse_cell(s: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("line {line}: not a number: {s:?}")))
}

pub fn read_matrix_csv(r: impl BufRead) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(line.split(',').map(|c| parse_cell(c, i + 1)).collect::<Result<_>>()?);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch { what: "CSV row length", expected: cols, got: bad.len() });
    }
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

/// Single-column CSV vector.
pub fn read_vector_csv(r: impl BufRead) -> Result<Vec<f64>> {
    let m = read_matrix_csv(r)?;
    if m.ncols() > 1 {
        return Err(Error::DimensionMismatch { what: "vector CSV columns", expected: 1, got: m.ncols() });
    }
    Ok(m.iter().copied().collect())
}
