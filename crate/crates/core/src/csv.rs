//! CSV datasets with a versioned schema comment line.

pub const SCHEMA_VERSION: u32 = 1;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits, lowercase exponent.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug)]
pub struct CsvTable {
    columns: usize,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    pub fn new(dataset: &str, columns: &[&str]) -> Self {
        let schema = format!("# schema: seba/{dataset}/v{SCHEMA_VERSION}\n").into_bytes();
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(schema);
        writer.write_record(columns).expect("write to memory");
        Self {
            columns: columns.len(),
            writer,
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(
            cells.len(),
            self.columns,
            "row width does not match the header"
        );
        let fields = cells.iter().map(|cell| match cell {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        });
        self.writer.write_record(fields).expect("write to memory");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("flush to memory");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = CsvTable::new("demo", &["a", "b", "c"]);
        t.row(vec![1.5.into(), 3usize.into(), Cell::Empty]);
        t.row(vec![(-2e-300).into(), "S1".into(), None::<f64>.into()]);
        assert_eq!(
            t.finish(),
            "# schema: seba/demo/v1\na,b,c\n1.5000000000000000e0,3,\n-2.0000000000000001e-300,S1,\n"
        );
    }
}
