// Reads the GCS binary stream with fetch and feeds decoded frames to the
// store; reconnects with backoff so a server restart only costs a moment
// of track history (the server is authoritative anyway).

import { DecodedFrame, FrameStream } from "./protocol.js";

export interface StreamHandle {
  stop(): void;
}

export function consumeStream(
  url: string,
  onFrame: (frame: DecodedFrame) => void,
  onStatus?: (connected: boolean) => void,
): StreamHandle {
  let stopped = false;
  let controller: AbortController | null = null;

  const loop = async () => {
    while (!stopped) {
      controller = new AbortController();
      try {
        const resp = await fetch(url, { signal: controller.signal });
        if (!resp.ok || !resp.body) throw new Error(`stream http ${resp.status}`);
        onStatus?.(true);
        const reader = resp.body.getReader();
        const frames = new FrameStream();
        for (;;) {
          const { done, value } = await reader.read();
          if (done || stopped) break;
          if (value) {
            for (const frame of frames.push(value)) onFrame(frame);
          }
        }
      } catch {
        // fall through to retry
      }
      onStatus?.(false);
      if (!stopped) await new Promise((r) => setTimeout(r, 1000));
    }
  };
  void loop();

  return {
    stop() {
      stopped = true;
      controller?.abort();
    },
  };
}
