use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use slimpart::io::{read_partition, write_csr_binary, write_metis_graph};
use slimpart::{edge_cut, generators, Epsilon, Partition};

fn partition_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_partition")).args(args).output().unwrap()
}

fn write_grid(dir: &Path) -> String {
    let path = dir.join("grid.metis");
    write_metis_graph(&path, &generators::grid(24, 24)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn writes_partition_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path());
    let report = dir.path().join("runs.csv");
    let out = partition_cmd(&[
        "--graph", &graph, "--k", "8", "--epsilon", "0.03", "--seed", "1",
        "--report", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let assignment = read_partition(format!("{graph}.part.8")).unwrap();
    let g = generators::grid(24, 24);
    let p = Partition::new(&g, 8, Epsilon::default(), assignment).unwrap();
    assert!(p.is_balanced());

    let csv = fs::read_to_string(report).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,k,seed,cut,imbalance,time_total_s,time_coarsen_s,time_initial_s,time_refine_s,peak_aux_bytes,compression_ratio"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], &["grid", "8", "1"]);
    assert_eq!(row[3].parse::<f64>().unwrap(), edge_cut(&g, p.assignment()).unwrap() as f64);
    assert!(lines.next().is_none());
}

#[test]
fn repetitions_add_a_mean_row() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path());
    let output = dir.path().join("best.part");
    let out = partition_cmd(&[
        "--graph", &graph, "--k", "4", "--repetitions", "5", "--workers", "2",
        "--output", output.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<String>> =
        csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 6);
    let cuts: Vec<f64> = rows[..5].iter().map(|r| r[3].parse().unwrap()).collect();
    let seeds: Vec<&str> = rows[..5].iter().map(|r| r[2].as_str()).collect();
    assert_eq!(seeds, ["0", "1", "2", "3", "4"]);
    assert_eq!(rows[5][2], "mean");
    let mean: f64 = rows[5][3].parse().unwrap();
    assert!((mean - cuts.iter().sum::<f64>() / 5.0).abs() < 1e-9);

    let g = generators::grid(24, 24);
    let best = edge_cut(&g, &read_partition(&output).unwrap()).unwrap() as f64;
    assert_eq!(best, cuts.iter().copied().fold(f64::INFINITY, f64::min));
}

#[test]
fn compressed_input_matches_plain_in_deterministic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let g = generators::random_geometric(2000, 8.0, 3);
    let metis = dir.path().join("rgg.metis");
    let bin = dir.path().join("rgg.bin");
    write_metis_graph(&metis, &g).unwrap();
    write_csr_binary(&bin, &g).unwrap();
    let run = |graph: &Path, format: &str, compress: &str, out: &str| {
        let out_path = dir.path().join(out);
        let o = partition_cmd(&[
            "--graph", graph.to_str().unwrap(), "--format", format, "--compress", compress,
            "--k", "6", "--seed", "9", "--deterministic", "--output", out_path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = String::from_utf8(o.stdout).unwrap();
        let ratio = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
        (read_partition(out_path).unwrap(), ratio)
    };
    let (plain, no_ratio) = run(&metis, "metis", "off", "a");
    let (compressed, ratio) = run(&metis, "metis", "on", "b");
    let (binary, _) = run(&bin, "csrbin", "on", "c");
    let (binary_plain, _) = run(&bin, "csrbin", "off", "d");
    assert_eq!(plain, compressed);
    assert_eq!(plain, binary);
    assert_eq!(plain, binary_plain);
    assert!(no_ratio.is_empty());
    assert!(ratio.parse::<f64>().unwrap() > 1.0);
}

#[test]
fn bad_flags_exit_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_grid(dir.path());
    for bad in [
        vec!["--graph", graph.as_str(), "--k", "0"],
        vec!["--graph", graph.as_str(), "--k", "2", "--epsilon", "-1"],
        vec!["--graph", graph.as_str(), "--k", "2", "--refiner", "fm"],
        vec!["--graph", graph.as_str(), "--k", "2", "--gain-table", "big"],
        vec!["--graph", graph.as_str(), "--k", "2", "--t-bump", "1"],
        vec!["--k", "2"],
    ] {
        let out = partition_cmd(&bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unreadable_input_fails_with_message() {
    let out = partition_cmd(&["--graph", "/nonexistent/graph.metis", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn perf_profile_from_run_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let header = "instance,k,seed,cut,imbalance,time_total_s,time_coarsen_s,time_initial_s,time_refine_s,peak_aux_bytes,compression_ratio\n";
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    fs::write(&a, format!("{header}g1,2,0,10,0,0,0,0,0,0,\ng1,2,1,30,0,0,0,0,0,0,\ng2,2,0,5,0,0,0,0,0,0,\n")).unwrap();
    fs::write(&b, format!("{header}g1,2,mean,40,0,0,0,0,0,0,\ng2,2,0,10,0,0,0,0,0,0,\n")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_perf-profile"))
        .args(["--run", &format!("A={}", a.display()), "--run", &format!("B={}", b.display())])
        .args(["--tau", "1,2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "tau,A,B\n1,1,0\n2,1,1\n");

    fs::write(&b, format!("{header}g1,2,0,40,0,0,0,0,0,0,\n")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_perf-profile"))
        .args(["--run", &format!("A={}", a.display()), "--run", &format!("B={}", b.display())])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("g2@2/B"));
}
