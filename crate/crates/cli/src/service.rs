//! Streaming service: one playback pipeline per TCP connection.
//!
//! Each connection runs three threads. A reader decodes client messages:
//! camera updates go into a single latest-value slot (a newer update
//! replaces an unread one) and controls into a small bounded queue. The
//! pipeline thread paces frames at the clip rate and hands encoded messages
//! to a writer through a queue bounded at [`QUEUE_FRAMES`].

use crate::protocol::{
    handshake_line, parse_handshake, read_message, write_message, Control, Encoding, Hello, Message, ProtocolError,
    HANDSHAKE, PROTOCOL_VERSION,
};
use crate::session::Session;
use anyhow::Result;
use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, SyncSender};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};
use vdrig::Vec3;

pub const QUEUE_FRAMES: usize = 4;
const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(10);

pub struct Server {
    listener: TcpListener,
    session: Arc<Session>,
    stop: Arc<AtomicBool>,
}

/// Handle to a server running on a background thread.
pub struct ServerHandle {
    pub addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<thread::JoinHandle<()>>,
}

impl ServerHandle {
    pub fn shutdown(mut self) {
        self.stop_and_join();
    }

    fn stop_and_join(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_and_join();
    }
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, session: Session) -> Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            session: Arc::new(session),
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accept connections until stopped, each served on its own threads.
    pub fn run(&self) {
        for conn in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let session = Arc::clone(&self.session);
            let stop = Arc::clone(&self.stop);
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = serve_connection(stream, &session, &stop) {
                    log::info!("connection {peer:?} ended: {e}");
                }
            });
        }
    }

    pub fn spawn(self) -> Result<ServerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::clone(&self.stop);
        let thread = thread::spawn(move || self.run());
        Ok(ServerHandle {
            addr,
            stop,
            thread: Some(thread),
        })
    }
}

enum Inbound {
    Control(Control),
    Failed(String),
}

struct Shared {
    camera: Mutex<Option<Vec3>>,
    closed: AtomicBool,
}

fn reader_loop(mut r: BufReader<TcpStream>, enc: Encoding, shared: Arc<Shared>, tx: SyncSender<Inbound>) {
    loop {
        match read_message(&mut r, enc) {
            Ok(Some(Message::CameraUpdate(c))) => {
                *shared.camera.lock().expect("camera slot") = Some(Vec3::new(c[0], c[1], c[2]));
            }
            Ok(Some(Message::Control(c))) => {
                if tx.send(Inbound::Control(c)).is_err() {
                    break;
                }
            }
            Ok(Some(other)) => {
                let _ = tx.send(Inbound::Failed(format!("unexpected message tag {} from client", other.tag())));
                return;
            }
            Ok(None) => break,
            Err(e) => {
                // Playback reports the failure to the client before closing.
                let _ = tx.send(Inbound::Failed(e.to_string()));
                return;
            }
        }
    }
    shared.closed.store(true, Ordering::SeqCst);
}

fn writer_loop(mut w: TcpStream, rx: Receiver<Vec<u8>>) {
    for bytes in rx {
        if w.write_all(&bytes).and_then(|_| w.flush()).is_err() {
            break;
        }
    }
    let _ = w.shutdown(std::net::Shutdown::Both);
}

fn serve_connection(stream: TcpStream, session: &Session, stop: &AtomicBool) -> Result<()> {
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(HANDSHAKE_TIMEOUT))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut w = stream.try_clone()?;
    let enc = match parse_handshake(&line) {
        Ok(e) => e,
        Err(e) => {
            let reason = match &e {
                ProtocolError::Handshake(m) => m.clone(),
                other => other.to_string(),
            };
            writeln!(w, "{HANDSHAKE} {PROTOCOL_VERSION} error {reason}")?;
            return Err(e.into());
        }
    };
    w.write_all(handshake_line(enc).as_bytes())?;
    stream.set_read_timeout(None)?;

    let shared = Arc::new(Shared {
        camera: Mutex::new(None),
        closed: AtomicBool::new(false),
    });
    let (in_tx, in_rx) = mpsc::sync_channel(QUEUE_FRAMES);
    let (out_tx, out_rx) = mpsc::sync_channel::<Vec<u8>>(QUEUE_FRAMES);
    {
        let shared = Arc::clone(&shared);
        thread::spawn(move || reader_loop(reader, enc, shared, in_tx));
    }
    let writer = thread::spawn(move || writer_loop(w, out_rx));
    let result = playback(session, enc, &shared, &in_rx, &out_tx, stop);
    drop(out_tx);
    let _ = writer.join();
    let _ = stream.shutdown(std::net::Shutdown::Both);
    result
}

fn send(out: &SyncSender<Vec<u8>>, enc: Encoding, m: &Message) -> bool {
    out.send(m.encode(enc)).is_ok()
}

fn playback(
    session: &Session,
    enc: Encoding,
    shared: &Shared,
    inbound: &Receiver<Inbound>,
    out: &SyncSender<Vec<u8>>,
    stop: &AtomicBool,
) -> Result<()> {
    let frames = session.frame_count();
    let hello = Hello::new(&session.rig, session.fps(), frames);
    if !send(out, enc, &Message::Hello(Box::new(hello))) {
        return Ok(());
    }
    let mut pipeline = session.pipeline()?;
    let dt = Duration::from_secs_f64(session.motion.clip.frame_time.max(1e-3));
    let mut camera: Option<Vec3> = None;
    let mut frame = 0usize;
    let mut paused = false;
    let mut dirty = true;
    let mut deadline = Instant::now();
    while !stop.load(Ordering::SeqCst) && !shared.closed.load(Ordering::SeqCst) {
        // Wait for the next tick, handling controls as they arrive.
        loop {
            let now = Instant::now();
            let wait = if paused && !dirty {
                Duration::from_millis(50)
            } else {
                deadline.saturating_duration_since(now)
            };
            if wait.is_zero() {
                break;
            }
            match inbound.recv_timeout(wait) {
                Ok(Inbound::Control(c)) => {
                    match c {
                        Control::Pause => paused = true,
                        Control::Resume => {
                            paused = false;
                            deadline = Instant::now();
                        }
                        Control::Seek { frame: f } => {
                            frame = (f as usize).min(frames.saturating_sub(1));
                            pipeline.reset();
                        }
                        Control::Toggle { behaviour, enabled } => {
                            let mut a = pipeline.ablation();
                            behaviour.apply(&mut a, enabled);
                            pipeline.set_ablation(a);
                        }
                    }
                    dirty = true;
                }
                Ok(Inbound::Failed(msg)) => {
                    send(out, enc, &Message::Error(msg.clone()));
                    anyhow::bail!("client error: {msg}");
                }
                Err(RecvTimeoutError::Timeout) => {
                    if paused && shared.camera.lock().expect("camera slot").is_some() {
                        dirty = true;
                        break;
                    }
                    if !paused {
                        break;
                    }
                }
                Err(RecvTimeoutError::Disconnected) => return Ok(()),
            }
            if stop.load(Ordering::SeqCst) || shared.closed.load(Ordering::SeqCst) {
                return Ok(());
            }
        }
        if let Some(c) = shared.camera.lock().expect("camera slot").take() {
            camera = Some(c);
        }
        if paused && !dirty {
            continue;
        }
        let cam = match camera {
            Some(c) => c,
            None => pipeline.track_camera(frame)?,
        };
        let f = pipeline.frame(frame, cam)?;
        // Blocks while the writer queue is full.
        if !send(out, enc, &Message::Frame(f.packet)) {
            return Ok(());
        }
        dirty = false;
        if !paused {
            frame += 1;
            if frame >= frames {
                frame = 0;
                pipeline.reset();
            }
            deadline += dt;
            let now = Instant::now();
            if deadline + dt < now {
                // Fell behind by more than a frame: resynchronize instead of bursting.
                deadline = now;
            }
        }
    }
    Ok(())
}

/// Minimal blocking client, used by tests and tools.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    pub encoding: Encoding,
}

impl Client {
    pub fn connect(addr: SocketAddr, enc: Encoding) -> Result<(Self, Hello)> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        writer.write_all(handshake_line(enc).as_bytes())?;
        let mut reader = BufReader::new(stream);
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let got = parse_handshake(&line)?;
        anyhow::ensure!(got == enc, "server answered with {got:?}");
        let mut c = Self {
            reader,
            writer,
            encoding: enc,
        };
        match c.recv()? {
            Some(Message::Hello(h)) => Ok((c, *h)),
            other => anyhow::bail!("expected hello, got {other:?}"),
        }
    }

    pub fn recv(&mut self) -> Result<Option<Message>, ProtocolError> {
        read_message(&mut self.reader, self.encoding)
    }

    pub fn send(&mut self, m: &Message) -> std::io::Result<()> {
        write_message(&mut self.writer, self.encoding, m)
    }

    pub fn send_raw(&mut self, bytes: &[u8]) -> std::io::Result<()> {
        self.writer.write_all(bytes)?;
        self.writer.flush()
    }

    pub fn set_timeout(&self, t: Option<Duration>) -> std::io::Result<()> {
        self.reader.get_ref().set_read_timeout(t)
    }
}
