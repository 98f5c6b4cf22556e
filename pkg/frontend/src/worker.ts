// Physics worker: owns the GameSession; the render loop never touches
// simulation state directly, it only receives frame snapshots.

import { GameSession } from "./game.js";
import type { FromWorker, ToWorker } from "./protocol.js";

const ctx = self as unknown as { postMessage(msg: FromWorker): void; onmessage: any };

let session: GameSession | null = null;

function post(msg: FromWorker): void {
  ctx.postMessage(msg);
}

ctx.onmessage = (event: MessageEvent<ToWorker>) => {
  const msg = event.data;
  switch (msg.type) {
    case "init": {
      session = new GameSession(msg.level);
      post({
        type: "ready",
        x: Array.from(session.grid.x),
        targetRegion: [
          msg.level.target_trap.x0 - 0.15,
          msg.level.target_trap.x0 + 0.15,
        ],
      });
      post(session.frame());
      break;
    }
    case "input": {
      session?.setInput(msg.x0, msg.amp);
      break;
    }
    case "advance": {
      if (!session) break;
      session.advance(msg.wallSeconds);
      post(session.frame());
      break;
    }
    case "reset": {
      if (session) {
        session = new GameSession(session.level);
        post(session.frame());
      }
      break;
    }
    case "finish": {
      if (!session) break;
      const { path, fidelity } = session.finish();
      post({ type: "recording", path, fidelity });
      break;
    }
  }
};
