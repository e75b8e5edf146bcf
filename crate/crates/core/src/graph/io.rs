//! Line-oriented text formats. Blank lines and `#` comments are ignored.
//!
//! * social: `u v w` for a directed edge, or a lone `u` declaring an isolated user
//! * road: `v name x y` for a vertex, `e a b [length]` for an undirected edge
//! * pois: `p vertex kw1,kw2,...`
//! * checkins: `u p f`
//! * visits: `u p t`, one line per timestamped visit

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BipartiteNetwork, Point, PoiId, PoiTable, RoadNetwork, SocialNetwork, UserId};
use crate::error::{Error, Result};

fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn bad(origin: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(origin: &Path, line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| bad(origin, line, format!("cannot parse {what} from {tok:?}")))
}

pub fn parse_social(text: &str, origin: &Path) -> Result<SocialNetwork> {
    let mut g = SocialNetwork::new();
    for (ln, t) in lines(text) {
        match t.as_slice() {
            [u] => {
                g.add_user(u);
            }
            [u, v, w] => {
                let w: f64 = num(origin, ln, w, "weight")?;
                let u = g.add_user(u);
                let v = g.add_user(v);
                g.add_edge(u, v, w)?;
            }
            _ => return Err(bad(origin, ln, "expected `u v w`")),
        }
    }
    Ok(g)
}

pub fn parse_road(text: &str, origin: &Path) -> Result<RoadNetwork> {
    let mut r = RoadNetwork::new();
    for (ln, t) in lines(text) {
        match t.as_slice() {
            ["v", name, x, y] => {
                let p = Point::new(num(origin, ln, x, "x")?, num(origin, ln, y, "y")?);
                r.add_vertex(name, p)?;
            }
            ["e", a, b, rest @ ..] if rest.len() <= 1 => {
                let va = r
                    .vertex_id(a)
                    .ok_or_else(|| Error::DanglingReference(format!("road edge endpoint {a} (line {ln})")))?;
                let vb = r
                    .vertex_id(b)
                    .ok_or_else(|| Error::DanglingReference(format!("road edge endpoint {b} (line {ln})")))?;
                let len = match rest {
                    [l] => Some(num(origin, ln, l, "length")?),
                    _ => None,
                };
                r.add_edge(va, vb, len)?;
            }
            _ => return Err(bad(origin, ln, "expected `v name x y` or `e a b [length]`")),
        }
    }
    r.ensure_connected()?;
    Ok(r)
}

pub fn parse_pois(text: &str, origin: &Path, road: &RoadNetwork) -> Result<PoiTable> {
    let mut t = PoiTable::new();
    for (ln, toks) in lines(text) {
        let [p, v, kws] = toks.as_slice() else {
            return Err(bad(origin, ln, "expected `p vertex kw1,kw2,...`"));
        };
        let vid = road
            .vertex_id(v)
            .ok_or_else(|| Error::DanglingReference(format!("poi {p} references vertex {v} (line {ln})")))?;
        let kws: Vec<&str> = kws.split(',').filter(|k| !k.is_empty()).collect();
        t.add_poi(p, vid, &kws)?;
    }
    Ok(t)
}

fn resolve(g: &SocialNetwork, pois: &PoiTable, u: &str, p: &str, ln: usize) -> Result<(UserId, PoiId)> {
    let uid = g
        .user_id(u)
        .ok_or_else(|| Error::DanglingReference(format!("check-in user {u} (line {ln})")))?;
    let pid = pois
        .poi_id(p)
        .ok_or_else(|| Error::DanglingReference(format!("check-in poi {p} (line {ln})")))?;
    Ok((uid, pid))
}

pub fn parse_checkins(text: &str, origin: &Path, g: &SocialNetwork, pois: &PoiTable) -> Result<BipartiteNetwork> {
    let mut b = BipartiteNetwork::new(g.user_count(), pois.poi_count());
    for (ln, toks) in lines(text) {
        let [u, p, f] = toks.as_slice() else {
            return Err(bad(origin, ln, "expected `u p f`"));
        };
        let (uid, pid) = resolve(g, pois, u, p, ln)?;
        let f: f64 = num(origin, ln, f, "frequency")?;
        if !(f > 0.0) {
            return Err(Error::NonPositiveFrequency {
                user: (*u).to_owned(),
                poi: (*p).to_owned(),
                freq: f,
            });
        }
        b.add_checkin(uid, pid, f)?;
    }
    Ok(b)
}

pub fn parse_visits(text: &str, origin: &Path, g: &SocialNetwork, pois: &PoiTable) -> Result<Vec<(UserId, PoiId, i64)>> {
    let mut out = Vec::new();
    for (ln, toks) in lines(text) {
        let [u, p, t] = toks.as_slice() else {
            return Err(bad(origin, ln, "expected `u p t`"));
        };
        let (uid, pid) = resolve(g, pois, u, p, ln)?;
        let t: i64 = num(origin, ln, t, "timestamp")?;
        if t < 0 {
            return Err(bad(origin, ln, "negative timestamp"));
        }
        out.push((uid, pid, t));
    }
    Ok(out)
}

pub fn load_social(path: &Path) -> Result<SocialNetwork> {
    parse_social(&fs::read_to_string(path)?, path)
}

pub fn load_road(path: &Path) -> Result<RoadNetwork> {
    parse_road(&fs::read_to_string(path)?, path)
}

pub fn load_pois(path: &Path, road: &RoadNetwork) -> Result<PoiTable> {
    parse_pois(&fs::read_to_string(path)?, path, road)
}

pub fn load_checkins(path: &Path, g: &SocialNetwork, pois: &PoiTable) -> Result<BipartiteNetwork> {
    parse_checkins(&fs::read_to_string(path)?, path, g, pois)
}

pub fn load_visits(path: &Path, g: &SocialNetwork, pois: &PoiTable) -> Result<Vec<(UserId, PoiId, i64)>> {
    parse_visits(&fs::read_to_string(path)?, path, g, pois)
}

pub fn write_social<W: Write>(g: &SocialNetwork, mut w: W) -> std::io::Result<()> {
    // Declaring every user up front keeps ids stable across a round trip.
    for u in g.users() {
        writeln!(w, "{}", g.user_name(u))?;
    }
    for (u, v, x) in g.edges() {
        writeln!(w, "{} {} {}", g.user_name(u), g.user_name(v), x)?;
    }
    Ok(())
}

pub fn write_road<W: Write>(r: &RoadNetwork, mut w: W) -> std::io::Result<()> {
    for i in 0..r.vertex_count() {
        let v = super::VertexId::from(i);
        let p = r.coord(v);
        writeln!(w, "v {} {} {}", r.vertex_name(v), p.x, p.y)?;
    }
    for (a, b, len) in r.edges() {
        writeln!(w, "e {} {} {}", r.vertex_name(a), r.vertex_name(b), len)?;
    }
    Ok(())
}

pub fn write_pois<W: Write>(r: &RoadNetwork, t: &PoiTable, mut w: W) -> std::io::Result<()> {
    for p in t.pois() {
        let kws: Vec<&str> = t.keywords(p).iter().map(|&k| t.keyword_name(k)).collect();
        writeln!(w, "{} {} {}", t.poi_name(p), r.vertex_name(t.vertex(p)), kws.join(","))?;
    }
    Ok(())
}

pub fn write_checkins<W: Write>(g: &SocialNetwork, t: &PoiTable, b: &BipartiteNetwork, mut w: W) -> std::io::Result<()> {
    for (u, p, f) in b.edges() {
        writeln!(w, "{} {} {}", g.user_name(u), t.poi_name(p), f)?;
    }
    Ok(())
}

pub fn write_visits<W: Write>(
    g: &SocialNetwork,
    t: &PoiTable,
    events: &[(UserId, PoiId, i64)],
    mut w: W,
) -> std::io::Result<()> {
    for &(u, p, ts) in events {
        writeln!(w, "{} {} {}", g.user_name(u), t.poi_name(p), ts)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn here() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn minimal_social() {
        let g = parse_social("a b 0.5\nb a 0.3\n", here()).unwrap();
        assert_eq!((g.user_count(), g.edge_count()), (2, 2));
    }

    #[test]
    fn social_errors() {
        assert!(matches!(parse_social("a a 0.5", here()), Err(Error::SelfLoop(_))));
        assert!(matches!(parse_social("a b 1.5", here()), Err(Error::InvalidWeight { .. })));
        assert!(matches!(parse_social("a b 0.5\na b 0.4", here()), Err(Error::DuplicateEdge(..))));
        assert!(matches!(parse_social("a b", here()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_social("# c\n\na b x", here()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn cross_references() {
        let road = parse_road("v r1 0 0\nv r2 1 0\nv r3 2 0\ne r1 r2\ne r2 r3 1.0\n", here()).unwrap();
        assert!(matches!(parse_pois("p1 r9 cafe", here(), &road), Err(Error::DanglingReference(_))));
        let pois = parse_pois("p1 r3 cafe,bar", here(), &road).unwrap();
        let g = parse_social("u1 u2 0.5", here()).unwrap();
        assert!(matches!(
            parse_checkins("u1 p1 0", here(), &g, &pois),
            Err(Error::NonPositiveFrequency { .. })
        ));
        let b = parse_checkins("u1 p1 4", here(), &g, &pois).unwrap();
        assert_eq!(b.locations(UserId(0)).count(), 1);
        assert!(matches!(
            parse_road("v a 0 0\nv b 1 1\n", here()),
            Err(Error::Disconnected { components: 2 })
        ));
    }
}
