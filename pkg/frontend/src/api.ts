// Minimal fetch layer over the REST wire format.  Only documented endpoints
// appear here; every request is recorded in `networkLog` so tests can prove
// that.  Credentials are held in a plain in-memory object and attached as
// headers per request; nothing touches persistent browser storage.

export interface WireRecord {
  recordID: string;
  ownerID?: string;
  collection: string;
  stamp: { wallMillis: number; seq: number };
  fields: Record<string, string>;
}

export interface Credentials {
  userID: string;
  password: string;
  username: string;
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
  ) {
    super(`${code}: ${message}`);
  }
}

export interface NetworkLogEntry {
  method: string;
  path: string;
  status: number;
}

export const networkLog: NetworkLogEntry[] = [];

async function request(
  base: string,
  method: string,
  path: string,
  options: { body?: unknown; auth?: Credentials } = {},
): Promise<any> {
  const headers: Record<string, string> = {};
  if (options.body !== undefined) headers["Content-Type"] = "application/json";
  if (options.auth) {
    headers["X-Flare-User"] = options.auth.userID;
    headers["X-Flare-Password"] = options.auth.password;
  }
  const response = await fetch(base + path, {
    method,
    headers,
    body: options.body === undefined ? undefined : JSON.stringify(options.body),
  });
  networkLog.push({ method, path: path.split("?")[0], status: response.status });
  const payload = await response.json();
  if (payload && typeof payload === "object" && "error" in payload) {
    throw new ApiError(payload.error, payload.message ?? "", response.status);
  }
  return payload;
}

export class FlareApi {
  appID: string | null = null;

  constructor(
    readonly base: string,
    readonly devKey: string,
  ) {}

  private appPath(suffix: string): string {
    if (this.appID === null) throw new Error("app not registered yet");
    return `/v1/apps/${this.appID}${suffix}`;
  }

  async registerApp(appName: string): Promise<string> {
    const payload = await request(this.base, "POST", "/v1/apps", {
      body: { devKey: this.devKey, appName },
    });
    this.appID = payload.appID;
    return payload.appID;
  }

  async authenticate(
    username: string,
    password: string,
  ): Promise<{ ok: boolean; userID?: string }> {
    return request(this.base, "POST", this.appPath("/users/authenticate"), {
      body: { username, password },
    });
  }

  async createUser(username: string, password: string): Promise<string> {
    const payload = await request(this.base, "POST", this.appPath("/users"), {
      body: { username, password, attributes: {} },
    });
    return payload.userID;
  }

  async putPost(auth: Credentials, text: string): Promise<string> {
    const payload = await request(this.base, "POST", this.appPath("/userStore/records"), {
      body: { collection: "posts", fields: { post: { value: text, access: "public" } } },
      auth,
    });
    return payload.recordID;
  }

  async ownTimeline(auth: Credentials): Promise<WireRecord[]> {
    const payload = await request(
      this.base,
      "GET",
      this.appPath("/userStore/records?fields=post&count=10"),
      { auth },
    );
    return payload.records;
  }

  async userPosts(username: string, auth?: Credentials): Promise<WireRecord[]> {
    const target = encodeURIComponent(`@${username}`);
    const payload = await request(
      this.base,
      "GET",
      this.appPath(`/userStore/records?fields=post&count=10&userID=${target}`),
      { auth },
    );
    return payload.records;
  }
}
