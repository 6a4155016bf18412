//! HTTP routing-table provider against a local stub server: happy path,
//! retry-then-succeed, hard failure, and malformed tables.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use lad_core::geo::Travel;
use lad_core::model::Point;
use lad_cli::io::scenario_sites;
use lad_cli::travel::fetch_http_table;

#[derive(Clone, Copy)]
enum Reply {
    /// Distances = straight line * 2.0, durations = distance * 100.
    Table,
    ServerError,
    MalformedTable,
    Garbage,
}

/// One-thread stub serving a programmed reply per request, in order. The
/// last behavior repeats for any further requests.
fn spawn_stub(behaviors: Vec<Reply>) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let hits_out = hits.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { break };
            let k = hits.fetch_add(1, Ordering::SeqCst);
            let behavior = *behaviors.get(k).or(behaviors.last()).unwrap();
            if serve_one(stream, behavior).is_err() {
                break;
            }
        }
    });
    (format!("http://{addr}/table"), hits_out)
}

fn serve_one(stream: TcpStream, behavior: Reply) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream);
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some(rest) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            content_length = rest.trim().parse().unwrap_or(0);
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let response_body = match behavior {
        Reply::Table | Reply::MalformedTable => {
            let request: serde_json::Value = serde_json::from_slice(&body).unwrap();
            let sites: Vec<(f64, f64)> = request["sites"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
                .collect();
            let n = sites.len();
            let rows = if matches!(behavior, Reply::MalformedTable) { n.saturating_sub(1) } else { n };
            let mut distances = Vec::new();
            let mut durations = Vec::new();
            for i in 0..rows {
                let mut d_row = Vec::new();
                let mut t_row = Vec::new();
                for j in 0..n {
                    let dx = sites[i].0 - sites[j].0;
                    let dy = sites[i].1 - sites[j].1;
                    let d = (dx * dx + dy * dy).sqrt() * 2.0;
                    d_row.push(d);
                    t_row.push(d * 100.0);
                }
                distances.push(d_row);
                durations.push(t_row);
            }
            serde_json::json!({ "distances_km": distances, "durations_s": durations }).to_string()
        }
        Reply::ServerError => {
            let body = "upstream exploded";
            let mut stream = reader.into_inner();
            write!(
                stream,
                "HTTP/1.1 500 Internal Server Error\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                body.len(),
                body
            )?;
            return Ok(());
        }
        Reply::Garbage => "this is not json".to_string(),
    };
    let mut stream = reader.into_inner();
    write!(
        stream,
        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
        response_body.len(),
        response_body
    )?;
    Ok(())
}

fn scenario() -> lad_core::model::Scenario {
    lad_core::testkit::rand_instance(12, &Default::default())
}

#[test]
fn fetches_the_table_and_serves_lookups_from_it() {
    let (endpoint, hits) = spawn_stub(vec![Reply::Table]);
    let s = scenario();
    let provider = fetch_http_table(&endpoint, &s).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 1);

    for (_, a) in scenario_sites(&s) {
        for (_, b) in scenario_sites(&s) {
            let leg = provider.leg(a, b).unwrap();
            let dx = a.x - b.x;
            let dy = a.y - b.y;
            let want = (dx * dx + dy * dy).sqrt() * 2.0;
            assert_eq!(leg.distance_km, want);
            assert_eq!(leg.duration_s, want * 100.0);
        }
    }
    // Unregistered points are an error, not a silent substitution.
    assert!(provider.leg(Point::new(-999.0, -999.0), s.depot).is_err());
}

#[test]
fn transient_failures_are_retried_twice() {
    let (endpoint, hits) = spawn_stub(vec![Reply::ServerError, Reply::Garbage, Reply::Table]);
    let s = scenario();
    let provider = fetch_http_table(&endpoint, &s).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    let sites = scenario_sites(&s);
    assert!(provider.leg(sites[0].1, sites[1].1).is_ok());
}

#[test]
fn persistent_failure_is_a_hard_error_after_three_attempts() {
    let (endpoint, hits) = spawn_stub(vec![Reply::ServerError]);
    let err = fetch_http_table(&endpoint, &scenario()).unwrap_err();
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    assert!(format!("{err:#}").contains("after 3 attempts"), "{err:#}");
}

#[test]
fn malformed_tables_are_rejected() {
    let (endpoint, _) = spawn_stub(vec![Reply::MalformedTable]);
    let err = fetch_http_table(&endpoint, &scenario()).unwrap_err();
    assert!(format!("{err:#}").contains("malformed"), "{err:#}");
}

#[test]
fn http_solve_matches_a_matrix_solve_of_the_same_table() {
    use lad_core::greedy::{solve_greedy, GreedyConfig};
    use lad_core::segments::precompute_segments;

    let (endpoint, _) = spawn_stub(vec![Reply::Table]);
    let s = scenario();
    let provider = fetch_http_table(&endpoint, &s).unwrap();
    let cache = precompute_segments(&s, &provider).unwrap();
    let sol_http = solve_greedy(&s, &cache, &GreedyConfig::default());

    // Dump the fetched table and reload it as a matrix provider.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    lad_cli::io::write_matrix_csv(&path, &scenario_sites(&s), &provider).unwrap();
    let matrix = lad_cli::io::read_matrix_csv(&path).unwrap();
    let offline = lad_cli::io::matrix_travel_for_scenario(&s, &matrix).unwrap();
    let cache2 = precompute_segments(&s, &offline).unwrap();
    let sol_matrix = solve_greedy(&s, &cache2, &GreedyConfig::default());

    assert_eq!(sol_http, sol_matrix);
}
