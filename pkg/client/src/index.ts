/**
 * Client for the socnav simulator's line-delimited JSON protocol.
 *
 * The environment follows the usual episodic RL shape (reset/step plus
 * observation and action spaces). By default each handle spawns its own
 * server subprocess over stdio; passing a port attaches to a running
 * TCP server instead. One request is in flight at a time, matching the
 * strictly request/response wire protocol.
 *
 * ```ts
 * const env = await makeEnv("SocNavAction-v0");
 * let obs = await env.reset(7);
 * while (true) {
 *   const { obs: next, reward, done } = await env.step(1); // GoAlone
 *   if (done) break;
 *   obs = next;
 * }
 * await env.close();
 * ```
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface, type Interface } from "node:readline";
import { Socket } from "node:net";

/** The one environment this package exposes. */
export const ENV_ID = "SocNavAction-v0";

/** Handshake result reported by the server's "spec" command. */
export interface EnvSpec {
  /** Observation length, 6 + 4 * H_cap. */
  obsDim: number;
  /** Size of the discrete action space (4: Halt, GoAlone, Follow, Pass). */
  nActions: number;
  /** Simulated seconds per step. */
  dt: number;
}

/** Per-step metrics, passed through from the server verbatim. */
export interface StepMetrics {
  d_g: number;
  force: number;
  blame: number;
  dist_step: number;
  human_collisions: number;
  wall_collisions: number;
}

export interface StepResult {
  obs: number[];
  reward: number;
  done: boolean;
  /** "success" | "failure" once done, null while the episode runs. */
  outcome: string | null;
  info: StepMetrics;
}

/** How to reach a server: spawn one (default) or attach over TCP. */
export interface LaunchOptions {
  /** Command to spawn; default ["python3", "-m", "socnav", "serve", "--stdio"]. */
  command?: string[];
  /** Path passed through as --config. */
  config?: string;
  /** Path passed through as --log (server-side step log). */
  log?: string;
  /** Attach to 127.0.0.1:port instead of spawning. */
  port?: number;
  host?: string;
  /** Handshake timeout in ms (default 15000). */
  timeoutMs?: number;
}

/** Failure to launch or handshake with a server. */
export class ConnectError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConnectError";
  }
}

/**
 * An error response from the server. The session survives these; the
 * next request proceeds normally.
 */
export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

interface Pending {
  resolve: (value: Record<string, unknown>) => void;
  reject: (err: Error) => void;
}

/**
 * Newline-framed JSON request/response over a child process or socket.
 * Responses are matched to requests in order; transport loss rejects
 * everything still pending.
 */
class Transport {
  private pending: Pending[] = [];
  private closed = false;
  private closeReason = "transport closed";

  private constructor(
    private readonly write: (line: string) => void,
    private readonly shutdown: () => void,
  ) {}

  static spawnProcess(argv: string[]): Promise<Transport> {
    return new Promise((resolve, reject) => {
      let child: ChildProcessWithoutNullStreams;
      try {
        child = spawn(argv[0], argv.slice(1), { stdio: ["pipe", "pipe", "pipe"] });
      } catch (err) {
        reject(new ConnectError(`failed to spawn ${argv[0]}: ${String(err)}`));
        return;
      }
      let settled = false;
      child.once("error", (err) => {
        if (!settled) {
          settled = true;
          reject(new ConnectError(`failed to spawn ${argv.join(" ")}: ${err.message}`));
        }
      });
      child.once("spawn", () => {
        if (settled) return;
        settled = true;
        const t = new Transport(
          (line) => child.stdin.write(line + "\n"),
          () => {
            child.stdin.end();
            child.kill();
          },
        );
        t.attach(createInterface({ input: child.stdout }));
        child.once("exit", (code) => t.fail(`server exited (code ${code})`));
        resolve(t);
      });
    });
  }

  static connectTcp(host: string, port: number): Promise<Transport> {
    return new Promise((resolve, reject) => {
      const sock = new Socket();
      sock.once("error", (err) =>
        reject(new ConnectError(`connect ${host}:${port} failed: ${err.message}`)),
      );
      sock.connect(port, host, () => {
        const t = new Transport(
          (line) => sock.write(line + "\n"),
          () => sock.end(),
        );
        t.attach(createInterface({ input: sock }));
        sock.once("close", () => t.fail("connection closed"));
        resolve(t);
      });
    });
  }

  private attach(lines: Interface): void {
    lines.on("line", (line) => {
      const waiter = this.pending.shift();
      if (!waiter) return; // unsolicited line; protocol never produces these
      try {
        waiter.resolve(JSON.parse(line) as Record<string, unknown>);
      } catch (err) {
        waiter.reject(new ConnectError(`unparseable response: ${String(err)}`));
      }
    });
  }

  private fail(reason: string): void {
    this.closed = true;
    this.closeReason = reason;
    const waiting = this.pending;
    this.pending = [];
    for (const w of waiting) w.reject(new ConnectError(reason));
  }

  request(msg: Record<string, unknown>, timeoutMs?: number): Promise<Record<string, unknown>> {
    if (this.closed) return Promise.reject(new ConnectError(this.closeReason));
    return new Promise((resolve, reject) => {
      let timer: NodeJS.Timeout | undefined;
      const entry: Pending = {
        resolve: (v) => {
          if (timer) clearTimeout(timer);
          resolve(v);
        },
        reject: (e) => {
          if (timer) clearTimeout(timer);
          reject(e);
        },
      };
      if (timeoutMs !== undefined) {
        timer = setTimeout(() => {
          const i = this.pending.indexOf(entry);
          if (i >= 0) this.pending.splice(i, 1);
          reject(new ConnectError(`no response within ${timeoutMs} ms`));
        }, timeoutMs);
      }
      this.pending.push(entry);
      this.write(JSON.stringify(msg));
    });
  }

  close(): void {
    if (!this.closed) {
      this.closed = true;
      this.shutdown();
    }
  }
}

function asObs(value: unknown, obsDim: number): number[] {
  if (!Array.isArray(value) || value.length !== obsDim) {
    throw new ConnectError(
      `malformed observation: expected ${obsDim} numbers, got ${JSON.stringify(value)}`,
    );
  }
  return value as number[];
}

/**
 * One environment handle bound to one server session. Create with
 * {@link makeEnv}; the constructor is private because the handshake is
 * asynchronous.
 */
export class SocNavEnv {
  /** Dimensions reported by the server handshake. */
  readonly spec: EnvSpec;
  readonly observationSpace: { readonly shape: readonly [number] };
  readonly actionSpace: { readonly n: number };
  /** True between a terminal step and the next reset. */
  lastDone = false;

  private constructor(private readonly transport: Transport, spec: EnvSpec) {
    this.spec = spec;
    this.observationSpace = { shape: [spec.obsDim] };
    this.actionSpace = { n: spec.nActions };
  }

  static async make(opts: LaunchOptions = {}): Promise<SocNavEnv> {
    let transport: Transport;
    if (opts.port !== undefined) {
      transport = await Transport.connectTcp(opts.host ?? "127.0.0.1", opts.port);
    } else {
      const argv = opts.command ?? ["python3", "-m", "socnav", "serve", "--stdio"];
      const full = [...argv];
      if (opts.config) full.push("--config", opts.config);
      if (opts.log) full.push("--log", opts.log);
      transport = await Transport.spawnProcess(full);
    }
    let reply: Record<string, unknown>;
    try {
      reply = await transport.request({ cmd: "spec" }, opts.timeoutMs ?? 15000);
    } catch (err) {
      transport.close();
      throw err instanceof ConnectError ? err : new ConnectError(String(err));
    }
    const { obs_dim, n_actions, dt } = reply as {
      obs_dim?: number;
      n_actions?: number;
      dt?: number;
    };
    if (
      typeof obs_dim !== "number" ||
      typeof n_actions !== "number" ||
      typeof dt !== "number"
    ) {
      transport.close();
      throw new ConnectError(`handshake failed: ${JSON.stringify(reply)}`);
    }
    return new SocNavEnv(transport, { obsDim: obs_dim, nActions: n_actions, dt });
  }

  private async exchange(msg: Record<string, unknown>): Promise<Record<string, unknown>> {
    const reply = await this.transport.request(msg);
    if (typeof reply.error === "string") throw new ProtocolError(reply.error);
    return reply;
  }

  /**
   * Start an episode. With a seed, the server restarts its scenario
   * schedule there, so fresh sessions given equal seeds replay
   * identical episodes.
   */
  async reset(seed?: number): Promise<number[]> {
    const msg: Record<string, unknown> = { cmd: "reset" };
    if (seed !== undefined) msg.seed = seed;
    const reply = await this.exchange(msg);
    this.lastDone = false;
    return asObs(reply.obs, this.spec.obsDim);
  }

  /**
   * Advance one action period. Rejects with {@link ProtocolError} on
   * out-of-range actions or stepping a finished episode; the session
   * survives and the next valid request proceeds.
   */
  async step(action: number): Promise<StepResult> {
    const reply = await this.exchange({ cmd: "step", action });
    const done = reply.done === true;
    this.lastDone = done;
    return {
      obs: asObs(reply.obs, this.spec.obsDim),
      reward: reply.reward as number,
      done,
      outcome: (reply.outcome ?? null) as string | null,
      info: reply.metrics as unknown as StepMetrics,
    };
  }

  /** End the session and release the server process or socket. */
  async close(): Promise<void> {
    try {
      await this.transport.request({ cmd: "close" }, 2000);
    } catch {
      // Transport already gone; nothing to release on the far side.
    }
    this.transport.close();
  }
}

/**
 * Create an environment by id. The id is checked so callers wired for
 * generic env registries fail loudly on typos; {@link SocNavEnv.make}
 * skips the indirection.
 */
export async function makeEnv(id: string = ENV_ID, opts: LaunchOptions = {}): Promise<SocNavEnv> {
  if (id !== ENV_ID) {
    throw new RangeError(`unknown environment id ${JSON.stringify(id)}; only ${ENV_ID} exists`);
  }
  return SocNavEnv.make(opts);
}
