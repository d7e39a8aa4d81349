//! On-disk dataset format: a directory with
//!
//! * `matrix.smx`: header line `n_rows<TAB>n_cols<TAB>nnz`, then one
//!   `row<TAB>col` pair per nonzero (0-based, values implicitly 1),
//! * `labels.tsv`: `row_id  y  group` (group is a name or an integer),
//! * `features.tsv`: `col_id  token  polarity`,
//! * `thresholds.tsv`: the class thresholds `a  b`.
//!
//! All tab-separated, UTF-8, LF endings. `thresholds.tsv` is optional on
//! read when the caller supplies fallback thresholds.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dataset::GroupedDataset;
use crate::sparse::SparseBinaryMatrix;
use crate::{Error, Result};

pub fn write_dataset(dir: &Path, ds: &GroupedDataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut m = BufWriter::new(fs::File::create(dir.join("matrix.smx"))?);
    writeln!(m, "{}\t{}\t{}", ds.n_rows(), ds.n_cols(), ds.x.nnz())?;
    for (i, row) in ds.x.iter_rows().enumerate() {
        for &j in row {
            writeln!(m, "{i}\t{j}")?;
        }
    }
    m.flush()?;

    let mut l = BufWriter::new(fs::File::create(dir.join("labels.tsv"))?);
    writeln!(l, "row_id\ty\tgroup")?;
    for i in 0..ds.n_rows() {
        writeln!(l, "{i}\t{}\t{}", ds.y[i], ds.group_names[ds.groups[i] as usize])?;
    }
    l.flush()?;

    let mut f = BufWriter::new(fs::File::create(dir.join("features.tsv"))?);
    writeln!(f, "col_id\ttoken\tpolarity")?;
    for j in 0..ds.n_cols() {
        writeln!(f, "{j}\t{}\t{}", ds.feature_names[j], ds.polarity[j])?;
    }
    f.flush()?;

    let mut t = BufWriter::new(fs::File::create(dir.join("thresholds.tsv"))?);
    writeln!(t, "a\tb")?;
    writeln!(t, "{}\t{}", ds.a, ds.b)?;
    t.flush()?;
    Ok(())
}

fn split_fields(line: &str) -> Vec<&str> {
    line.trim_end_matches(['\n', '\r']).split('\t').collect()
}

fn parse<T: std::str::FromStr>(path: &Path, line_no: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| {
        Error::parse(
            path.display().to_string(),
            line_no,
            format!("cannot parse {what} from '{field}'"),
        )
    })
}

pub fn read_dataset(dir: &Path, fallback_thresholds: Option<(f64, f64)>) -> Result<GroupedDataset> {
    let matrix_path = dir.join("matrix.smx");
    let reader = BufReader::new(fs::File::open(&matrix_path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(matrix_path.display().to_string(), 1, "empty file"))??;
    let h = split_fields(&header);
    if h.len() != 3 {
        return Err(Error::parse(
            matrix_path.display().to_string(),
            1,
            "header must be n_rows<TAB>n_cols<TAB>nnz",
        ));
    }
    let n_rows: usize = parse(&matrix_path, 1, h[0], "n_rows")?;
    let n_cols: usize = parse(&matrix_path, 1, h[1], "n_cols")?;
    let nnz: usize = parse(&matrix_path, 1, h[2], "nnz")?;
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n_rows];
    let mut seen = 0usize;
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f = split_fields(&line);
        let line_no = idx + 2;
        if f.len() != 2 {
            return Err(Error::parse(
                matrix_path.display().to_string(),
                line_no,
                "expected row<TAB>col",
            ));
        }
        let r: usize = parse(&matrix_path, line_no, f[0], "row index")?;
        let c: u32 = parse(&matrix_path, line_no, f[1], "column index")?;
        if r >= n_rows || c as usize >= n_cols {
            return Err(Error::parse(
                matrix_path.display().to_string(),
                line_no,
                format!("entry ({r}, {c}) outside {n_rows} x {n_cols}"),
            ));
        }
        rows[r].push(c);
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::parse(
            matrix_path.display().to_string(),
            1,
            format!("header promises {nnz} nonzeros, found {seen}"),
        ));
    }
    let x = SparseBinaryMatrix::from_rows(n_cols, &rows)?;

    let labels_path = dir.join("labels.tsv");
    let mut y = vec![f64::NAN; n_rows];
    let mut raw_groups: Vec<String> = vec![String::new(); n_rows];
    let mut filled = 0usize;
    for (idx, line) in BufReader::new(fs::File::open(&labels_path)?).lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line_no == 1 || line.is_empty() {
            continue;
        }
        let f = split_fields(&line);
        if f.len() != 3 {
            return Err(Error::parse(
                labels_path.display().to_string(),
                line_no,
                "expected row_id<TAB>y<TAB>group",
            ));
        }
        let r: usize = parse(&labels_path, line_no, f[0], "row id")?;
        if r >= n_rows {
            return Err(Error::parse(
                labels_path.display().to_string(),
                line_no,
                format!("row id {r} out of range"),
            ));
        }
        y[r] = parse(&labels_path, line_no, f[1], "response")?;
        raw_groups[r] = f[2].to_string();
        filled += 1;
    }
    if filled != n_rows {
        return Err(Error::parse(
            labels_path.display().to_string(),
            1,
            format!("labels cover {filled} of {n_rows} rows"),
        ));
    }

    let mut group_names: Vec<String> = raw_groups.clone();
    group_names.sort();
    group_names.dedup();
    if group_names.iter().all(|g| g.parse::<u64>().is_ok()) {
        group_names.sort_by_key(|g| g.parse::<u64>().unwrap());
    }
    let groups: Vec<u32> = raw_groups
        .iter()
        .map(|g| group_names.iter().position(|n| n == g).unwrap() as u32)
        .collect();

    let features_path = dir.join("features.tsv");
    let mut feature_names = vec![String::new(); n_cols];
    let mut polarity = vec![f64::NAN; n_cols];
    let mut filled = 0usize;
    for (idx, line) in BufReader::new(fs::File::open(&features_path)?).lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line_no == 1 || line.is_empty() {
            continue;
        }
        let f = split_fields(&line);
        if f.len() != 3 {
            return Err(Error::parse(
                features_path.display().to_string(),
                line_no,
                "expected col_id<TAB>token<TAB>polarity",
            ));
        }
        let c: usize = parse(&features_path, line_no, f[0], "column id")?;
        if c >= n_cols {
            return Err(Error::parse(
                features_path.display().to_string(),
                line_no,
                format!("column id {c} out of range"),
            ));
        }
        feature_names[c] = f[1].to_string();
        polarity[c] = parse(&features_path, line_no, f[2], "polarity")?;
        filled += 1;
    }
    if filled != n_cols {
        return Err(Error::parse(
            features_path.display().to_string(),
            1,
            format!("features cover {filled} of {n_cols} columns"),
        ));
    }

    let thresholds_path = dir.join("thresholds.tsv");
    let (a, b) = if thresholds_path.exists() {
        let content = fs::read_to_string(&thresholds_path)?;
        let line = content.lines().nth(1).ok_or_else(|| {
            Error::parse(thresholds_path.display().to_string(), 2, "missing threshold row")
        })?;
        let f = split_fields(line);
        if f.len() != 2 {
            return Err(Error::parse(
                thresholds_path.display().to_string(),
                2,
                "expected a<TAB>b",
            ));
        }
        (
            parse(&thresholds_path, 2, f[0], "threshold a")?,
            parse(&thresholds_path, 2, f[1], "threshold b")?,
        )
    } else {
        fallback_thresholds.ok_or_else(|| {
            Error::config(format!(
                "{} has no thresholds.tsv; supply the class thresholds explicitly",
                dir.display()
            ))
        })?
    };

    GroupedDataset::new(x, y, groups, group_names, a, b, feature_names, polarity)
}
