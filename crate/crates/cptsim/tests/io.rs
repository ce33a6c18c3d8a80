use std::path::Path;

use cptsim::error::CliError;
use cptsim::io::{read_scans, read_spectrum, write_scans, write_spectrum};
use cptsim_core::spectrum::{ScanSeries, Spectrum};
use proptest::prelude::*;

fn spectrum_strategy() -> impl Strategy<Value = Spectrum> {
    prop::collection::vec((1e3f64..1e7, 0.0f64..1e9), 1..60).prop_map(|v| {
        let mut f = 2.7e9;
        let (mut grid, mut y) = (Vec::new(), Vec::new());
        for (step, value) in v {
            f += step;
            grid.push(f);
            y.push(value);
        }
        Spectrum::new(grid, y).unwrap()
    })
}

proptest! {
    #[test]
    fn spectrum_csv_round_trips_exactly(s in spectrum_strategy()) {
        let mut buf = Vec::new();
        write_spectrum(&mut buf, Path::new("s.csv"), &s).unwrap();
        let back = read_spectrum(buf.as_slice(), Path::new("s.csv")).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn scan_csv_round_trips_exactly(
        s in spectrum_strategy(),
        scans in 1usize..5,
        base in 0u64..1_000_000,
    ) {
        let counts: Vec<Vec<u64>> = (0..scans)
            .map(|k| (0..s.len()).map(|i| base + (k * 31 + i) as u64).collect())
            .collect();
        let series = ScanSeries { grid: s.f_mod.clone(), counts, active: vec![true; scans], seed: 0 };
        let mut buf = Vec::new();
        write_scans(&mut buf, Path::new("scans.csv"), &series).unwrap();
        let (grid, counts) = read_scans(buf.as_slice(), Path::new("scans.csv")).unwrap();
        prop_assert_eq!(grid, series.grid);
        prop_assert_eq!(counts, series.counts);
    }
}

#[test]
fn errors_name_the_row() {
    let text = "f_mod_hz,intensity\n1.0,2.0\n2.0,3.0\n3.0,x\n";
    match read_spectrum(text.as_bytes(), Path::new("bad.csv")) {
        Err(CliError::Csv { row, .. }) => assert_eq!(row, 4),
        other => panic!("{other:?}"),
    }
    let wrong_header = "freq,intensity\n1.0,2.0\n";
    assert!(read_spectrum(wrong_header.as_bytes(), Path::new("h.csv")).is_err());
    let unsorted = "f_mod_hz,intensity\n2.0,1.0\n1.0,1.0\n";
    assert!(read_spectrum(unsorted.as_bytes(), Path::new("u.csv")).is_err());
    let short_scan = "scan_index,f_mod_hz,counts\n0,1.0,5\n0,2.0,6\n1,1.0,7\n";
    assert!(read_scans(short_scan.as_bytes(), Path::new("sc.csv")).is_err());
}
