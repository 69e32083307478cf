# high-precision Taylor shooting for -V1''+V1V2^2=0, -V2''+V2V1^2=0, V(0)=1, V1'(0)=a=-V2'(0)
import mpmath as mp
mp.mp.dps = 45
N=30; H=mp.mpf('0.025')
def step(v1,d1,v2,d2,h):
    a=[v1,d1]; c=[v2,d2]
    for k in range(N):
        # coefficients k of P=V2^2, Q=V1*P ; R=V1^2, S=V2*R
        P=sum(c[i]*c[k-i] for i in range(k+1))
        R=sum(a[i]*a[k-i] for i in range(k+1))
        # need Q_k = sum a_i P_{k-i}: store P list
        Ps.append(P); Rs.append(R)
        Q=sum(a[i]*Ps[k-i] for i in range(k+1))
        S=sum(c[i]*Rs[k-i] for i in range(k+1))
        a.append(Q/((k+1)*(k+2))); c.append(S/((k+1)*(k+2)))
    v1n=sum(a[k]*h**k for k in range(len(a))); d1n=sum(k*a[k]*h**(k-1) for k in range(1,len(a)))
    v2n=sum(c[k]*h**k for k in range(len(c))); d2n=sum(k*c[k]*h**(k-1) for k in range(1,len(c)))
    return v1n,d1n,v2n,d2n
def run(a,X,record=False):
    global Ps,Rs
    v1,d1,v2,d2=mp.mpf(1),a,mp.mpf(1),-a
    x=mp.mpf(0)
    while x<X-H/2:
        Ps=[];Rs=[]
        v1,d1,v2,d2=step(v1,d1,v2,d2,H); x+=H
        if v2<0: return -1,(v1,d1,v2,d2)
        if d2>0: return +1,(v1,d1,v2,d2)
    return 0,(v1,d1,v2,d2)
lo=mp.mpf('1.4'); hi=mp.mpf('1.6')
X=mp.mpf(7)
for it in range(170):
    mid=(lo+hi)/2
    s,_=run(mid,X)
    if s==-1: hi=mid
    elif s==+1: lo=mid
    else: break
a=(lo+hi)/2
print("a=V1'(0)=",mp.nstr(a,30), "a^2=",mp.nstr(a*a,20))
for XX in [4,5,6,6.5]:
    s,(v1,d1,v2,d2)=run(a,mp.mpf(XX))
    print(XX,"A=",mp.nstr(d1,25),"A^2=",mp.nstr(d1*d1,20),"B=",mp.nstr(v1-d1*XX,25),"v2=",mp.nstr(v2,5))
