use biplot_motion::data::{ingest_csv, read_csv, slice_by_time, Dataset};
use biplot_motion::fixtures;
use biplot_motion::{Error, ErrorKind};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn gapminder_fixture_shape() {
    let d = read_csv(fixtures::gapminder_csv().as_bytes(), "year", Some("continent"), None).unwrap();
    assert_eq!((d.n(), d.p()), (60, 3));
    assert_eq!(d.variable_names(), ["lifeExp", "pop", "gdpPercap"]);
    let years: Vec<String> = fixtures::gapminder_years().iter().map(|y| y.to_string()).collect();
    assert_eq!(d.levels(), years.as_slice());
    let slices = slice_by_time(&d).unwrap();
    assert_eq!(slices.len(), 12);
    assert!(slices.iter().all(|s| s.count() == 5));
    // Rows are written year by year, so slices are contiguous.
    for s in &slices {
        assert!(s.row_indices.windows(2).all(|w| w[1] == w[0] + 1));
    }
}

#[test]
fn climate_units_are_read_from_headers() {
    let d = read_csv(fixtures::climate_csv(3, 1).as_bytes(), "Year", Some("Region"), None).unwrap();
    assert_eq!(d.variable_names()[0], "AP");
    assert_eq!(d.column_units()[0].as_deref(), Some("m/day"));
    assert_eq!(d.groups().len(), 10);
}

#[test]
fn single_level_is_rejected() {
    let csv = "t,g,a,b\n1,x,1,2\n1,x,2,3\n1,y,4,1\n";
    let err = read_csv(csv.as_bytes(), "t", Some("g"), None).unwrap_err();
    assert!(matches!(err, Error::Cardinality(1)));
    assert_eq!(err.kind(), ErrorKind::Data);
}

#[test]
fn bad_cell_is_named() {
    let csv = "t,g,a,b\n1,x,1,2\n2,x,abc,3\n";
    match read_csv(csv.as_bytes(), "t", Some("g"), None) {
        Err(Error::Parse { row, column, value }) => {
            assert_eq!((row, column.as_str(), value.as_str()), (2, "a", "abc"));
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn missing_column_and_file() {
    let csv = "t,a,b\n1,1,2\n2,2,3\n";
    let err = read_csv(csv.as_bytes(), "t", Some("region"), None).unwrap_err();
    assert!(matches!(err, Error::MissingColumn(ref c) if c == "region"));
    assert_eq!(err.kind(), ErrorKind::Config);
    let err = ingest_csv("/nonexistent/data.csv", "t", None, None).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Io);
}

#[test]
fn explicit_level_order() {
    let csv = "t,a,b\nb,1,2\na,2,3\nb,0,1\n";
    let order = vec!["a".to_string(), "b".to_string()];
    let d = read_csv(csv.as_bytes(), "t", None, Some(&order)).unwrap();
    assert_eq!(d.levels(), order.as_slice());
    let d = read_csv(csv.as_bytes(), "t", None, None).unwrap();
    assert_eq!(d.levels(), ["b", "a"]);
    let bad = vec!["a".to_string()];
    assert!(read_csv(csv.as_bytes(), "t", None, Some(&bad)).is_err());
}

fn dataset(labels: Vec<String>) -> Dataset {
    let n = labels.len();
    let x = DMatrix::from_fn(n, 2, |i, j| (i * 2 + j) as f64);
    Dataset::new(x, labels, None, vec!["a".into(), "b".into()], None).unwrap()
}

fn labels_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(1990u32..1996, 2..60)
        .prop_filter("at least two levels", |v| v.iter().any(|&x| x != v[0]))
        .prop_map(|v| v.into_iter().map(|y| y.to_string()).collect())
}

proptest! {
    #[test]
    fn slices_match_brute_force_filter(labels in labels_strategy()) {
        let d = dataset(labels.clone());
        let slices = slice_by_time(&d).unwrap();
        let mut levels: Vec<&String> = labels.iter().collect();
        levels.sort_by_key(|l| l.parse::<i64>().unwrap());
        levels.dedup();
        prop_assert_eq!(slices.len(), levels.len());
        for (s, level) in slices.iter().zip(levels) {
            let expected: Vec<usize> = (0..labels.len()).filter(|&i| &labels[i] == level).collect();
            prop_assert_eq!(&s.level, level);
            prop_assert_eq!(&s.row_indices, &expected);
        }
    }

    #[test]
    fn slices_partition_the_rows(labels in labels_strategy()) {
        let d = dataset(labels);
        let slices = slice_by_time(&d).unwrap();
        let mut all: Vec<usize> = slices.iter().flat_map(|s| s.row_indices.clone()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..d.n()).collect::<Vec<_>>());
        prop_assert_eq!(slices, slice_by_time(&d).unwrap());
    }

    #[test]
    fn interleaving_does_not_change_slice_contents(labels in labels_strategy()) {
        let interleaved = dataset(labels.clone());
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by_key(|&i| (labels[i].parse::<i64>().unwrap(), i));
        let sorted_labels: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        let sorted = Dataset::new(
            interleaved.numeric().select_rows(&order),
            sorted_labels,
            None,
            vec!["a".into(), "b".into()],
            None,
        )
        .unwrap();
        for (a, b) in slice_by_time(&interleaved).unwrap().iter().zip(slice_by_time(&sorted).unwrap()) {
            prop_assert_eq!(interleaved.rows(&a.row_indices), sorted.rows(&b.row_indices));
        }
    }
}
