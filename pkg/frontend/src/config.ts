// Build-time configuration with runtime overrides for tests and deployments:
// set window.FLARE_SERVER / window.FLARE_DEV_KEY before loading the bundle,
// or serve the bundle from the API server itself (same-origin, empty base).

declare global {
  // eslint-disable-next-line no-var
  var FLARE_SERVER: string | undefined;
  // eslint-disable-next-line no-var
  var FLARE_DEV_KEY: string | undefined;
}

export const SERVER_URL: string = globalThis.FLARE_SERVER ?? "http://127.0.0.1:8080";
export const DEV_KEY: string = globalThis.FLARE_DEV_KEY ?? "F92KLF5434TR4H";
export const APP_NAME = "flitterApp";
