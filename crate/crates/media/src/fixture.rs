//! Writer for small synthetic MP4 files with exactly known timing. Used as
//! test fixtures; the files carry no decodable media.

use framewise_core::annotation::FrameRate;

#[derive(Debug, Clone)]
pub struct Mp4Spec {
    pub timescale: u32,
    /// `(sample_count, sample_delta)` runs of the video track.
    pub runs: Vec<(u32, u32)>,
    pub width: u32,
    pub height: u32,
    /// Write 64-bit `tkhd`/`mdhd` variants.
    pub version1: bool,
    /// Put an audio track before the video track.
    pub audio_first: bool,
}

impl Mp4Spec {
    /// Constant-rate track of `frames` frames at `fps`.
    pub fn cfr(fps: FrameRate, frames: u32, width: u32, height: u32) -> Self {
        let (num, den) = (fps.num(), fps.den());
        let (timescale, delta) =
            if (90_000 * u64::from(den)) % u64::from(num) == 0 { (90_000, (90_000 * u64::from(den) / u64::from(num)) as u32) } else { (num, den) };
        Mp4Spec { timescale, runs: vec![(frames, delta)], width, height, version1: false, audio_first: false }
    }

    pub fn write(&self) -> Vec<u8> {
        let ticks: u64 = self.runs.iter().map(|(c, d)| u64::from(*c) * u64::from(*d)).sum();
        let mut moov = mvhd(self.timescale, ticks);
        if self.audio_first {
            moov.extend(trak(self, b"soun", 1, ticks, &[(10, 1024)], 0, 0));
        }
        moov.extend(trak(self, b"vide", 2, ticks, &self.runs, self.width, self.height));

        let mut out = bx(b"ftyp", &[b"isom".as_slice(), &0x200u32.to_be_bytes(), b"isomiso2mp41"].concat());
        out.extend(bx(b"moov", &moov));
        out.extend(bx(b"mdat", &[0u8; 64]));
        out
    }
}

fn bx(kind: &[u8; 4], body: &[u8]) -> Vec<u8> {
    let mut v = Vec::with_capacity(body.len() + 8);
    v.extend(((body.len() + 8) as u32).to_be_bytes());
    v.extend(kind);
    v.extend(body);
    v
}

fn mvhd(timescale: u32, duration: u64) -> Vec<u8> {
    let mut b = vec![0u8; 4 + 4 + 4];
    b.extend(timescale.to_be_bytes());
    b.extend((duration as u32).to_be_bytes());
    b.extend(0x0001_0000u32.to_be_bytes());
    b.extend(0x0100u16.to_be_bytes());
    b.extend([0u8; 10]);
    b.extend(matrix());
    b.extend([0u8; 24]);
    b.extend(3u32.to_be_bytes());
    bx(b"mvhd", &b)
}

fn matrix() -> Vec<u8> {
    [0x0001_0000u32, 0, 0, 0, 0x0001_0000, 0, 0, 0, 0x4000_0000].iter().flat_map(|v| v.to_be_bytes()).collect()
}

fn trak(spec: &Mp4Spec, handler: &[u8; 4], id: u32, duration: u64, runs: &[(u32, u32)], width: u32, height: u32) -> Vec<u8> {
    let v1 = spec.version1;
    let mut tkhd = vec![u8::from(v1), 0, 0, 3];
    if v1 {
        tkhd.extend([0u8; 16]);
        tkhd.extend(id.to_be_bytes());
        tkhd.extend([0u8; 4]);
        tkhd.extend(duration.to_be_bytes());
    } else {
        tkhd.extend([0u8; 8]);
        tkhd.extend(id.to_be_bytes());
        tkhd.extend([0u8; 4]);
        tkhd.extend((duration as u32).to_be_bytes());
    }
    tkhd.extend([0u8; 8 + 2 + 2 + 2 + 2]);
    tkhd.extend(matrix());
    tkhd.extend((width << 16).to_be_bytes());
    tkhd.extend((height << 16).to_be_bytes());

    let mut mdhd = vec![u8::from(v1), 0, 0, 0];
    if v1 {
        mdhd.extend([0u8; 16]);
        mdhd.extend(spec.timescale.to_be_bytes());
        mdhd.extend(duration.to_be_bytes());
    } else {
        mdhd.extend([0u8; 8]);
        mdhd.extend(spec.timescale.to_be_bytes());
        mdhd.extend((duration as u32).to_be_bytes());
    }
    mdhd.extend([0x55, 0xc4, 0, 0]);

    let mut hdlr = vec![0u8; 8];
    hdlr.extend(handler);
    hdlr.extend([0u8; 12]);
    hdlr.extend(b"fixture\0");

    let mut stts = vec![0u8; 4];
    stts.extend((runs.len() as u32).to_be_bytes());
    for (c, d) in runs {
        stts.extend(c.to_be_bytes());
        stts.extend(d.to_be_bytes());
    }
    let n: u32 = runs.iter().map(|r| r.0).sum();
    let mut stsz = vec![0u8; 4];
    stsz.extend(1u32.to_be_bytes());
    stsz.extend(n.to_be_bytes());

    let stbl = [bx(b"stts", &stts), bx(b"stsz", &stsz)].concat();
    let minf = bx(b"stbl", &stbl);
    let mdia = [bx(b"mdhd", &mdhd), bx(b"hdlr", &hdlr), bx(b"minf", &minf)].concat();
    bx(b"trak", &[bx(b"tkhd", &tkhd), bx(b"mdia", &mdia)].concat())
}
