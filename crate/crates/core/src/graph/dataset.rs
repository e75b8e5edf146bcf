use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::io;
use super::{BipartiteNetwork, PoiTable, RoadNetwork, SocialNetwork};
use crate::error::Result;

pub const SOCIAL_FILE: &str = "social.txt";
pub const ROAD_FILE: &str = "road.txt";
pub const POI_FILE: &str = "pois.txt";
pub const CHECKIN_FILE: &str = "checkins.txt";
pub const VISIT_FILE: &str = "visits.txt";

/// The three networks plus the POI table, loaded together.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub social: SocialNetwork,
    pub road: RoadNetwork,
    pub pois: PoiTable,
    pub checkins: BipartiteNetwork,
}

impl Dataset {
    /// Loads `social.txt`, `road.txt`, `pois.txt` and `checkins.txt` from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Dataset> {
        let social = io::load_social(&dir.join(SOCIAL_FILE))?;
        let road = io::load_road(&dir.join(ROAD_FILE))?;
        let pois = io::load_pois(&dir.join(POI_FILE), &road)?;
        let checkins = io::load_checkins(&dir.join(CHECKIN_FILE), &social, &pois)?;
        Ok(Dataset {
            social,
            road,
            pois,
            checkins,
        })
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        io::write_social(&self.social, BufWriter::new(File::create(dir.join(SOCIAL_FILE))?))?;
        io::write_road(&self.road, BufWriter::new(File::create(dir.join(ROAD_FILE))?))?;
        io::write_pois(&self.road, &self.pois, BufWriter::new(File::create(dir.join(POI_FILE))?))?;
        io::write_checkins(
            &self.social,
            &self.pois,
            &self.checkins,
            BufWriter::new(File::create(dir.join(CHECKIN_FILE))?),
        )?;
        Ok(())
    }

    /// Hex SHA-256 over the serialized networks. Snapshots carry it as their epoch.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut buf = Vec::new();
        io::write_social(&self.social, &mut buf).expect("in-memory write");
        buf.push(0);
        io::write_road(&self.road, &mut buf).expect("in-memory write");
        buf.push(0);
        io::write_pois(&self.road, &self.pois, &mut buf).expect("in-memory write");
        buf.push(0);
        io::write_checkins(&self.social, &self.pois, &self.checkins, &mut buf).expect("in-memory write");
        h.update(&buf);
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn user_count(&self) -> usize {
        self.social.user_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Point, UserId};

    fn tiny() -> Dataset {
        let mut social = SocialNetwork::with_users(3);
        social.add_edge(UserId(0), UserId(1), 0.5).unwrap();
        social.add_edge(UserId(1), UserId(0), 0.25).unwrap();
        let mut road = RoadNetwork::new();
        let a = road.add_vertex("r0", Point::new(0.0, 0.0)).unwrap();
        let b = road.add_vertex("r1", Point::new(1.5, 2.0)).unwrap();
        road.add_edge(a, b, None).unwrap();
        let mut pois = PoiTable::new();
        let p = pois.add_poi("p0", b, &["x", "y"]).unwrap();
        let mut checkins = BipartiteNetwork::new(3, 1);
        checkins.add_checkin(UserId(1), p, 2.0).unwrap();
        Dataset {
            social,
            road,
            pois,
            checkins,
        }
    }

    #[test]
    fn round_trip() {
        let ds = tiny();
        let dir = tempfile::tempdir().unwrap();
        ds.write_dir(dir.path()).unwrap();
        let back = Dataset::load_dir(dir.path()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.fingerprint(), ds.fingerprint());
    }
}
