use normembed_cli::records::*;

#[test]
fn every_row_type_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.csv");

    let rows = vec![
        ReconstructionRow {
            graph: "rooted(grid(2,2),tree(2,1),0)".into(),
            space: "l1:2*poincare:3:-0.5".into(),
            seed: 3,
            d_avg_pct: Some(0.1 + 0.2),
            map_pct: Some(100.0),
            wall_time_s: Some(1e-7),
            best_epoch: Some(12),
            status: Status::Ok,
        },
        ReconstructionRow {
            graph: "g".into(),
            space: "linf:20".into(),
            seed: 4,
            d_avg_pct: None,
            map_pct: None,
            wall_time_s: None,
            best_epoch: None,
            status: Status::Failed,
        },
    ];
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv::<ReconstructionRow>(&p).unwrap(), rows);

    let rows = vec![CapacityRow {
        family: "tree".into(),
        size: 5,
        nodes: 364,
        space: "l2:20".into(),
        seed: 0,
        d_avg_pct: Some(std::f64::consts::PI),
        map_pct: None,
        wall_time_s: Some(12.5),
        best_epoch: Some(3000),
        status: Status::Ok,
    }];
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv::<CapacityRow>(&p).unwrap(), rows);

    let rows = vec![RecsysRow {
        dataset: "ml-100k".into(),
        space: "l1:20".into(),
        seed: 1,
        hr10: Some(0.545),
        ndcg10: Some(1.0 / 3.0),
        status: Status::Ok,
    }];
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv::<RecsysRow>(&p).unwrap(), rows);

    let rows = vec![LinkPredRow {
        dataset: "cora".into(),
        space: "poincare:16".into(),
        seed: 2,
        auc: Some(0.9123456789012345),
        status: Status::Ok,
    }];
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv::<LinkPredRow>(&p).unwrap(), rows);

    let rows = vec![HistogramRow {
        bin_low: -1.0,
        bin_high: -0.98,
        count: 66_000,
    }];
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv::<HistogramRow>(&p).unwrap(), rows);

    let rows = summarize(
        &[LinkPredRow {
            dataset: "d".into(),
            space: "l2:2".into(),
            seed: 0,
            auc: Some(0.7),
            status: Status::Ok,
        }],
        |r| (r.dataset.clone(), r.space.clone()),
        &[("auc", |r| r.auc)],
    );
    write_csv(&p, &rows).unwrap();
    assert_eq!(read_csv::<SummaryRow>(&p).unwrap(), rows);
}
