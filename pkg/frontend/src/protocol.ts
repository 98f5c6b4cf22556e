// Wire types shared with the game service (JSON shapes of its endpoints).

export interface Bounds {
  x_min: number;
  x_max: number;
  amp_min: number;
  amp_max: number;
  max_speed: number;
}

export interface LevelView {
  id: string;
  dt: number;
  duration_window: [number, number];
  playback_factor: number;
  tick_interval_seconds: number;
  score_beta: number;
  bounds: Bounds;
  grid: { x_min: number; x_max: number; n_points: number };
  static_trap: { x0: number; amplitude: number; waist: number };
  target_trap: { x0: number; amplitude: number; waist: number };
  config_json: string;
}

export interface PathPayload {
  duration: number;
  dt: number;
  x0: number[];
  amp: number[];
}

export interface RecordView {
  id: string;
  player_id: string;
  level_id: string;
  duration: number;
  client_fidelity: number | null;
  server_fidelity: number;
  score: number;
  flagged: boolean;
  created_at: string;
  created?: boolean;
}

// worker <-> main thread messages
export interface InitMessage {
  type: "init";
  level: LevelView;
}

export interface InputMessage {
  type: "input";
  x0: number;
  amp: number;
}

export interface AdvanceMessage {
  type: "advance";
  wallSeconds: number;
}

export interface ResetMessage {
  type: "reset";
}

export interface FinishMessage {
  type: "finish";
}

export type ToWorker = InitMessage | InputMessage | AdvanceMessage | ResetMessage | FinishMessage;

export interface FrameMessage {
  type: "frame";
  t: number;
  density: number[];
  potential: number[];
  fidelity: number;
  x0: number;
  amp: number;
  steps: number;
}

export interface RecordingMessage {
  type: "recording";
  path: PathPayload;
  fidelity: number;
}

export interface ReadyMessage {
  type: "ready";
  x: number[];
  targetRegion: [number, number];
}

export type FromWorker = FrameMessage | RecordingMessage | ReadyMessage;
